//! Numerical toolkit for non-Hermitian two-band lattice models.
//!
//! The crate covers dense complex eigen-analysis with biorthogonal
//! eigenvectors, construction of the anti-unitary operator pair that
//! accompanies a non-defective twofold degeneracy, the bipartite square
//! lattice model with Peierls phases and nonreciprocal hoppings, Brillouin
//! zone degeneracy scans, composite-symmetry verification and open-boundary
//! (ribbon) spectra.

pub mod algebra;
pub mod contour;
pub mod error;
pub mod io;
pub mod model;
pub mod obc;
pub mod scan;
pub mod symmetry;
pub mod theorem;

pub use algebra::{
    coalescence, coalescence_pair, discriminant, eigensystem2, eigensystem_n, CoalescenceReport,
    ComplexMat, ComplexVec, Eigensystem, RightEigensystem,
};
pub use error::{Error, Result};
pub use model::{Boundary, DVector, ModelParams, Momentum};
pub use num_complex::Complex64;

/// Version string embedded in every output file.
pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");
