use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error(
        "eigensolver did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("input is not biorthogonal; measured Gram matrix {gram:?}")]
    NotBiorthogonal { gram: [[(f64, f64); 2]; 2] },

    #[error("parameter {name} = {value} is outside the required regime ({regime})")]
    Regime {
        name: &'static str,
        value: f64,
        regime: &'static str,
    },

    #[error("zero vector supplied")]
    ZeroVector,

    #[error("site phase {phase} is incommensurate with a torus of length {length}")]
    Incommensurate { phase: f64, length: usize },

    #[error("unknown symmetry name: {0}")]
    UnknownSymmetry(String),

    #[error("composition is not a pure translation/phase: {0}")]
    NotPureTranslation(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
