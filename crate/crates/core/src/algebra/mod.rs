//! Complex dense linear algebra: analytic 2×2 eigensystems, a general dense
//! non-Hermitian eigensolver, biorthogonal normalization and coalescence
//! diagnostics.

pub(crate) mod dense;

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use dense::CLUSTER_RADIUS;
pub use dense::{eigensystem_n, eigenvalues_n, inverse, right_eigensystem, solve, MAX_DIM};

/// Square complex matrix, row-major.
pub type ComplexMat = Array2<Complex64>;
pub type ComplexVec = Array1<Complex64>;

pub(crate) const EPS: f64 = f64::EPSILON;

/// Default defective threshold: overlap above `1 - DEFECTIVE_TOL` flags a coalescence.
pub const DEFECTIVE_TOL: f64 = 1e-8;

#[inline]
pub fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Checks that `h` is square with finite entries and returns its dimension.
pub fn validate(h: &ComplexMat) -> Result<usize> {
    let (r, c) = h.dim();
    if r != c {
        return Err(Error::Dimension(format!(
            "matrix is {r}x{c}, expected square"
        )));
    }
    if r == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    for ((row, col), z) in h.indexed_iter() {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite { row, col });
        }
    }
    Ok(r)
}

pub fn frobenius(m: &ComplexMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(v: ArrayView1<Complex64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ⟨a|b⟩ = Σ conj(a_i) b_i.
pub fn inner(a: ArrayView1<Complex64>, b: ArrayView1<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn adjoint(m: &ComplexMat) -> ComplexMat {
    m.t().mapv(|z| z.conj())
}

pub fn conj(m: &ComplexMat) -> ComplexMat {
    m.mapv(|z| z.conj())
}

pub fn identity(n: usize) -> ComplexMat {
    Array2::from_diag_elem(n, Complex64::new(1.0, 0.0))
}

pub fn mat2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> ComplexMat {
    ndarray::array![[a, b], [c, d]]
}

/// Lexicographic (Re, then Im) ordering used for every eigenvalue list.
pub fn cmp_re_im(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Eigenvalues with biorthogonal right/left eigenvectors (stored as columns).
///
/// Right vectors are unit-norm; left vectors carry the biorthogonal scale so
/// that ⟨ψ^L_m|ψ^R_n⟩ = δ_mn whenever the spectrum is non-defective.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub eigenvalues: Vec<Complex64>,
    pub right_vectors: ComplexMat,
    pub left_vectors: ComplexMat,
    pub residual: f64,
    pub defective: bool,
}

/// Eigenvalues with right eigenvectors only, see [`right_eigensystem`].
#[derive(Debug, Clone)]
pub struct RightEigensystem {
    pub eigenvalues: Vec<Complex64>,
    pub right_vectors: ComplexMat,
    pub residual: f64,
    pub defective: bool,
}

impl RightEigensystem {
    pub fn right(&self, n: usize) -> ArrayView1<'_, Complex64> {
        self.right_vectors.column(n)
    }
}

impl Eigensystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn right(&self, n: usize) -> ArrayView1<'_, Complex64> {
        self.right_vectors.column(n)
    }

    pub fn left(&self, n: usize) -> ArrayView1<'_, Complex64> {
        self.left_vectors.column(n)
    }

    /// max_mn |⟨ψ^L_m|ψ^R_n⟩ − δ_mn|.
    pub fn biorthogonality_error(&self) -> f64 {
        let g = adjoint(&self.left_vectors).dot(&self.right_vectors);
        let mut worst = 0.0f64;
        for ((m, n), z) in g.indexed_iter() {
            let target = if m == n { 1.0 } else { 0.0 };
            worst = worst.max((z - target).norm());
        }
        worst
    }

    /// ‖Σ_n |ψ^R_n⟩⟨ψ^L_n| − 𝟙‖_F.
    pub fn completeness_error(&self) -> f64 {
        let p = self.right_vectors.dot(&adjoint(&self.left_vectors));
        frobenius(&(p - identity(self.dim())))
    }
}

/// Coalescence diagnostics of an eigenvector pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoalescenceReport {
    /// |⟨ψ̂^R_1|ψ̂^R_2⟩| of unit-normalized right vectors.
    pub overlap: f64,
    /// |⟨ψ̂^L_n|ψ̂^R_n⟩| before biorthogonal scaling (smallest over the pair).
    pub biorth_norm: f64,
}

/// η = tr(h)² − 4 det(h).
pub fn discriminant(h: &ComplexMat) -> Result<Complex64> {
    if h.dim() != (2, 2) {
        return Err(Error::Dimension(format!(
            "discriminant needs 2x2, got {:?}",
            h.dim()
        )));
    }
    validate(h)?;
    Ok(discriminant_unchecked(h))
}

#[inline]
pub(crate) fn discriminant_unchecked(h: &ComplexMat) -> Complex64 {
    let (a, b, c, d) = (h[[0, 0]], h[[0, 1]], h[[1, 0]], h[[1, 1]]);
    // (a − d)² + 4bc equals tr² − 4det without the cancellation between the two.
    (a - d) * (a - d) + 4.0 * b * c
}

fn perp(v: ArrayView1<Complex64>) -> ComplexVec {
    ndarray::array![-v[1].conj(), v[0].conj()]
}

fn right_vector_2x2(h: &ComplexMat, lam: Complex64) -> Option<ComplexVec> {
    let (a, b, c, d) = (h[[0, 0]], h[[0, 1]], h[[1, 0]], h[[1, 1]]);
    let v1 = ndarray::array![b, lam - a];
    let v2 = ndarray::array![lam - d, c];
    let (n1, n2) = (vec_norm(v1.view()), vec_norm(v2.view()));
    let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
    if n == 0.0 {
        None
    } else {
        Some(v / Complex64::new(n, 0.0))
    }
}

/// Analytic eigensystem of a 2×2 matrix: ε± = (tr ± √η)/2 on the principal
/// branch, sorted by (Re, Im).
///
/// Right vectors are unit-norm; left vectors are scaled so that
/// ⟨ψ^L_n|ψ^R_n⟩ = 1 whenever |⟨ψ̂^L_n|ψ̂^R_n⟩| > `tol`. If the coalescence
/// overlap exceeds `1 − tol` the result carries `defective = true`.
pub fn eigensystem2(h: &ComplexMat, tol: f64) -> Result<Eigensystem> {
    if h.dim() != (2, 2) {
        return Err(Error::Dimension(format!(
            "eigensystem2 needs 2x2, got {:?}",
            h.dim()
        )));
    }
    validate(h)?;
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let tr = h[[0, 0]] + h[[1, 1]];
    let s = discriminant_unchecked(h).sqrt();
    let mut lams = [(tr + s) * 0.5, (tr - s) * 0.5];
    lams.sort_by(cmp_re_im);

    let scalar = h[[0, 1]] == Complex64::new(0.0, 0.0)
        && h[[1, 0]] == Complex64::new(0.0, 0.0)
        && h[[0, 0]] == h[[1, 1]];
    if scalar {
        let lam0 = h[[0, 0]];
        return Ok(Eigensystem {
            eigenvalues: vec![lam0, lam0],
            right_vectors: identity(2),
            left_vectors: identity(2),
            residual: 0.0,
            defective: false,
        });
    }

    let r0 = right_vector_2x2(h, lams[0]).expect("non-scalar 2x2 has an eigenvector");
    let r1 = right_vector_2x2(h, lams[1]).expect("non-scalar 2x2 has an eigenvector");
    let overlap = inner(r0.view(), r1.view()).norm().min(1.0);
    let defective = overlap > 1.0 - tol;

    let mut right = ComplexMat::zeros((2, 2));
    right.column_mut(0).assign(&r0);
    right.column_mut(1).assign(&r1);

    // ψ^L_0 ⟂ ψ^R_1 and ψ^L_1 ⟂ ψ^R_0, then scale the left vector only.
    let mut left = ComplexMat::zeros((2, 2));
    for (n, other) in [(0usize, &r1), (1usize, &r0)] {
        let mut l = perp(other.view());
        let g = inner(l.view(), right.column(n));
        if g.norm() > tol {
            l /= g.conj();
        }
        left.column_mut(n).assign(&l);
    }

    let residual = pair_residual(h, &lams, &right, &left);
    Ok(Eigensystem {
        eigenvalues: lams.to_vec(),
        right_vectors: right,
        left_vectors: left,
        residual,
        defective,
    })
}

/// max over n of ‖Hψ^R − λψ^R‖/‖ψ^R‖ and ‖H†ψ^L − λ*ψ^L‖/‖ψ^L‖.
pub(crate) fn pair_residual(
    h: &ComplexMat,
    lams: &[Complex64],
    right: &ComplexMat,
    left: &ComplexMat,
) -> f64 {
    let hd = adjoint(h);
    let mut worst = 0.0f64;
    for (n, &lam) in lams.iter().enumerate() {
        let r = right.column(n);
        let rn = vec_norm(r).max(f64::MIN_POSITIVE);
        let rr = h.dot(&r) - r.mapv(|z| z * lam);
        worst = worst.max(vec_norm(rr.view()) / rn);
        let l = left.column(n);
        let ln = vec_norm(l).max(f64::MIN_POSITIVE);
        let lr = hd.dot(&l) - l.mapv(|z| z * lam.conj());
        worst = worst.max(vec_norm(lr.view()) / ln);
    }
    worst
}

/// Coalescence diagnostics of a 2×2 matrix.
pub fn coalescence(h: &ComplexMat) -> Result<CoalescenceReport> {
    let es = eigensystem2(h, DEFECTIVE_TOL)?;
    coalescence_pair(es.right(0), es.right(1))
}

/// Coalescence diagnostics of an explicit eigenvector pair.
///
/// For a pair, the unit left vector dual to ψ^R_n is the component orthogonal
/// to the partner, so biorth_norm = √(1 − overlap²).
pub fn coalescence_pair(
    r1: ArrayView1<Complex64>,
    r2: ArrayView1<Complex64>,
) -> Result<CoalescenceReport> {
    if r1.len() != r2.len() {
        return Err(Error::Dimension("eigenvector lengths differ".into()));
    }
    let (n1, n2) = (vec_norm(r1), vec_norm(r2));
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    let overlap = (inner(r1, r2).norm() / (n1 * n2)).min(1.0);
    Ok(CoalescenceReport {
        overlap,
        biorth_norm: (1.0 - overlap * overlap).max(0.0).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(a: [[(f64, f64); 2]; 2]) -> ComplexMat {
        mat2(
            cx(a[0][0].0, a[0][0].1),
            cx(a[0][1].0, a[0][1].1),
            cx(a[1][0].0, a[1][0].1),
            cx(a[1][1].0, a[1][1].1),
        )
    }

    #[test]
    fn discriminant_examples() {
        assert_eq!(discriminant(&identity(2)).unwrap(), cx(0.0, 0.0));
        let jordan = m([[(0., 0.), (1., 0.)], [(0., 0.), (0., 0.)]]);
        assert_eq!(discriminant(&jordan).unwrap(), cx(0.0, 0.0));
        let h = m([[(0., 0.), (-4., 0.)], [(-4., 0.), (0., 0.)]]);
        // λ² − 16 has roots ±4, so (λ₊ − λ₋)² = 64
        assert_abs_diff_eq!(discriminant(&h).unwrap().re, 64.0, epsilon = 1e-12);
        assert!(discriminant(&identity(3)).is_err());
    }

    #[test]
    fn eigensystem2_symmetric_pair() {
        let h = m([[(0., 0.), (-4., 0.)], [(-4., 0.), (0., 0.)]]);
        let es = eigensystem2(&h, 1e-8).unwrap();
        assert_abs_diff_eq!(es.eigenvalues[0].re, -4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(es.eigenvalues[1].re, 4.0, epsilon = 1e-12);
        // λ = −4 ↔ (1, 1)/√2, λ = +4 ↔ (1, −1)/√2
        let r0 = es.right(0);
        assert_abs_diff_eq!((r0[0] - r0[1]).norm(), 0.0, epsilon = 1e-12);
        let r1 = es.right(1);
        assert_abs_diff_eq!((r1[0] + r1[1]).norm(), 0.0, epsilon = 1e-12);
        assert!(es.biorthogonality_error() < 1e-12);
        assert!(!es.defective);
    }

    #[test]
    fn eigensystem2_scalar_and_zero() {
        let lam0 = cx(0.3, -1.2);
        let es = eigensystem2(&identity(2).mapv(|z| z * lam0), 1e-8).unwrap();
        assert_eq!(es.eigenvalues, vec![lam0, lam0]);
        assert!(!es.defective);
        assert!(es.biorthogonality_error() < 1e-15);
        let es0 = eigensystem2(&ComplexMat::zeros((2, 2)), 1e-8).unwrap();
        assert_eq!(es0.eigenvalues, vec![cx(0., 0.), cx(0., 0.)]);
        assert!(!es0.defective);
    }

    #[test]
    fn eigensystem2_flags_jordan_block() {
        let jordan = m([[(0., 0.), (1., 0.)], [(0., 0.), (0., 0.)]]);
        let es = eigensystem2(&jordan, 1e-8).unwrap();
        assert!(es.defective);
        assert_eq!(es.eigenvalues, vec![cx(0., 0.), cx(0., 0.)]);
    }

    #[test]
    fn coalescence_examples() {
        let jordan = m([[(0., 0.), (1., 0.)], [(0., 0.), (0., 0.)]]);
        assert_abs_diff_eq!(coalescence(&jordan).unwrap().overlap, 1.0, epsilon = 1e-15);
        let sz = m([[(1., 0.), (0., 0.)], [(0., 0.), (-1., 0.)]]);
        let rep = coalescence(&sz).unwrap();
        assert_abs_diff_eq!(rep.overlap, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rep.biorth_norm, 1.0, epsilon = 1e-15);
        let z = ComplexVec::zeros(2);
        assert!(matches!(
            coalescence_pair(z.view(), z.view()),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn eigensystem2_rejects_bad_input() {
        let mut h = identity(2);
        h[[0, 1]] = cx(f64::NAN, 0.0);
        assert!(matches!(
            eigensystem2(&h, 1e-8),
            Err(Error::NonFinite { .. })
        ));
        assert!(matches!(
            eigensystem2(&identity(3), 1e-8),
            Err(Error::Dimension(_))
        ));
    }
}
