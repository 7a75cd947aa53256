//! Anti-unitary operator pair attached to a non-defective twofold degeneracy.
//!
//! For right eigenvectors ψ^R_1, ψ^R_2 and biorthogonal left partners
//! ψ^L_1, ψ^L_2 of a common eigenvalue λ₀, the operators act as v ↦ A·conj(v)
//! with A_R = ψ^R_1 (ψ^R_2)ᵀ − ψ^R_2 (ψ^R_1)ᵀ and the analogous A_L. This
//! module builds them and measures every relation they satisfy.

use ndarray::{Array1, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    adjoint, conj, cx, dense::clusters, eigensystem_n, frobenius, identity, inner, inverse,
    vec_norm, ComplexMat, ComplexVec, Eigensystem, CLUSTER_RADIUS,
};
use crate::error::{Error, Result};
use crate::Complex64;

/// Tolerance used to accept a supplied subspace as biorthogonal and invariant.
pub const SUBSPACE_TOL: f64 = 1e-8;

/// Bound on every relation checked by [`verify_theorem`].
pub const THEOREM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct DegenerateSubspace {
    pub lambda0: Complex64,
    pub psi_r1: ComplexVec,
    pub psi_r2: ComplexVec,
    pub psi_l1: ComplexVec,
    pub psi_l2: ComplexVec,
}

impl DegenerateSubspace {
    /// Validates biorthogonality and the eigen-equations against `h`.
    pub fn new(
        h: &ComplexMat,
        lambda0: Complex64,
        right: [ComplexVec; 2],
        left: [ComplexVec; 2],
    ) -> Result<Self> {
        let n = crate::algebra::validate(h)?;
        if right.iter().chain(left.iter()).any(|v| v.len() != n) {
            return Err(Error::Dimension(
                "subspace vectors do not match the matrix".into(),
            ));
        }
        let [psi_r1, psi_r2] = right;
        let [psi_l1, psi_l2] = left;
        let sub = DegenerateSubspace {
            lambda0,
            psi_r1,
            psi_r2,
            psi_l1,
            psi_l2,
        };
        sub.check_biorthogonal(SUBSPACE_TOL)?;
        let scale = frobenius(h).max(1.0);
        let hd = adjoint(h);
        for v in [&sub.psi_r1, &sub.psi_r2] {
            let r = vec_norm((h.dot(v) - v.mapv(|z| z * lambda0)).view()) / vec_norm(v.view());
            if r > SUBSPACE_TOL * scale {
                return Err(Error::Precondition(format!(
                    "right vector is not an eigenvector of lambda0 (residual {r:.3e})"
                )));
            }
        }
        for v in [&sub.psi_l1, &sub.psi_l2] {
            let r =
                vec_norm((hd.dot(v) - v.mapv(|z| z * lambda0.conj())).view()) / vec_norm(v.view());
            if r > SUBSPACE_TOL * scale {
                return Err(Error::Precondition(format!(
                    "left vector is not an adjoint eigenvector of lambda0 (residual {r:.3e})"
                )));
            }
        }
        Ok(sub)
    }

    /// Gram matrix G_ij = ⟨ψ^L_i|ψ^R_j⟩.
    pub fn gram(&self) -> [[Complex64; 2]; 2] {
        let (l, r) = (self.left(), self.right());
        let mut g = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                g[i][j] = inner(l[i], r[j]);
            }
        }
        g
    }

    pub fn check_biorthogonal(&self, tol: f64) -> Result<()> {
        let g = self.gram();
        let err = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| (g[i][j] - if i == j { 1.0 } else { 0.0 }).norm())
            .fold(0.0, f64::max);
        if err > tol {
            return Err(Error::NotBiorthogonal {
                gram: g.map(|row| row.map(|z| (z.re, z.im))),
            });
        }
        Ok(())
    }

    pub fn right(&self) -> [ArrayView1<'_, Complex64>; 2] {
        [self.psi_r1.view(), self.psi_r2.view()]
    }

    pub fn left(&self) -> [ArrayView1<'_, Complex64>; 2] {
        [self.psi_l1.view(), self.psi_l2.view()]
    }

    pub fn dim(&self) -> usize {
        self.psi_r1.len()
    }

    /// Biorthogonal projector P = Σ_i ψ^R_i (ψ^L_i)†.
    pub fn projector(&self) -> ComplexMat {
        outer(&self.psi_r1, &self.psi_l1.mapv(|z| z.conj()))
            + outer(&self.psi_r2, &self.psi_l2.mapv(|z| z.conj()))
    }
}

fn outer(a: &ComplexVec, b: &ComplexVec) -> ComplexMat {
    let n = a.len();
    ComplexMat::from_shape_fn((n, b.len()), |(i, j)| a[i] * b[j])
}

/// Extracts the twofold degenerate pair from an eigensystem of `h`.
///
/// Eigenvalues within 10⁻⁷·max(‖H‖, 1) of each other form a cluster. The pair is the
/// unique cluster of size two, or the size-two cluster nearest `hint` when
/// given. Its left block is re-biorthogonalized against the right block.
pub fn extract_subspace(
    h: &ComplexMat,
    es: &Eigensystem,
    hint: Option<Complex64>,
) -> Result<DegenerateSubspace> {
    // Energies are in model units, so an absolute floor of one keeps
    // rounding-level splittings of a vanishing matrix inside the cluster.
    let radius = CLUSTER_RADIUS * frobenius(h).max(1.0);
    let pairs: Vec<Vec<usize>> = clusters(&es.eigenvalues, radius)
        .into_iter()
        .filter(|c| c.len() == 2)
        .collect();
    let pick = match (pairs.len(), hint) {
        (0, _) => {
            return Err(Error::Precondition(
                "no twofold degenerate eigenvalue found".into(),
            ))
        }
        (1, _) => &pairs[0],
        (_, Some(target)) => pairs
            .iter()
            .min_by(|a, b| {
                let da = (es.eigenvalues[a[0]] - target).norm();
                let db = (es.eigenvalues[b[0]] - target).norm();
                da.total_cmp(&db)
            })
            .expect("nonempty"),
        (_, None) => {
            return Err(Error::Precondition(
                "several degenerate pairs; pass a hint eigenvalue".into(),
            ))
        }
    };
    let (i, j) = (pick[0], pick[1]);
    let r = [es.right(i).to_owned(), es.right(j).to_owned()];
    if inner(r[0].view(), r[1].view()).norm() > 1.0 - crate::algebra::DEFECTIVE_TOL {
        return Err(Error::Precondition(
            "degenerate pair is defective: right eigenvectors coalesce".into(),
        ));
    }
    let mut l = [es.left(i).to_owned(), es.left(j).to_owned()];
    let mut g = ComplexMat::zeros((2, 2));
    for a in 0..2 {
        for b in 0..2 {
            g[[a, b]] = inner(l[a].view(), r[b].view());
        }
    }
    let gih = adjoint(&inverse(&g).map_err(|_| {
        Error::Precondition("left and right blocks of the pair are not dual".into())
    })?);
    let l0 = l.clone();
    for (b, lb) in l.iter_mut().enumerate() {
        *lb = l0[0].mapv(|z| z * gih[[0, b]]) + l0[1].mapv(|z| z * gih[[1, b]]);
    }
    let lambda0 = (es.eigenvalues[i] + es.eigenvalues[j]) * 0.5;
    DegenerateSubspace::new(h, lambda0, r, l)
}

/// Matrix part A of the anti-linear map v ↦ A·conj(v).
#[derive(Clone, Debug, PartialEq)]
pub struct AntiunitaryOperator {
    pub matrix_part: ComplexMat,
}

impl AntiunitaryOperator {
    pub fn apply(&self, v: ArrayView1<Complex64>) -> ComplexVec {
        self.matrix_part.dot(&v.mapv(|z| z.conj()))
    }

    /// Matrix part of the composition self ∘ other, i.e. A·conj(B).
    pub fn compose(&self, other: &AntiunitaryOperator) -> ComplexMat {
        self.matrix_part.dot(&conj(&other.matrix_part))
    }
}

fn antisym(a: &ComplexVec, b: &ComplexVec) -> ComplexMat {
    outer(a, b) - outer(b, a)
}

pub fn make_upsilon_right(sub: &DegenerateSubspace) -> Result<AntiunitaryOperator> {
    sub.check_biorthogonal(SUBSPACE_TOL)?;
    Ok(AntiunitaryOperator {
        matrix_part: antisym(&sub.psi_r1, &sub.psi_r2),
    })
}

pub fn make_upsilon_left(sub: &DegenerateSubspace) -> Result<AntiunitaryOperator> {
    sub.check_biorthogonal(SUBSPACE_TOL)?;
    Ok(AntiunitaryOperator {
        matrix_part: antisym(&sub.psi_l1, &sub.psi_l2),
    })
}

/// Residual scale max(‖H‖_F, 1): relative for matrices of model size or
/// larger, absolute for matrices that vanish up to rounding.
fn scale_of(h: &ComplexMat) -> f64 {
    frobenius(h).max(1.0)
}

/// Intertwining residuals relative to max(‖H‖_F, 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntertwiningReport {
    /// ‖H A_R − A_R Hᵀ‖ / ‖H‖.
    pub right: f64,
    /// ‖A_L conj(H) − H† A_L‖ / ‖H‖.
    pub left: f64,
}

pub fn verify_intertwining(
    h: &ComplexMat,
    ur: &AntiunitaryOperator,
    ul: &AntiunitaryOperator,
) -> Result<IntertwiningReport> {
    let n = crate::algebra::validate(h)?;
    if ur.matrix_part.dim() != (n, n) || ul.matrix_part.dim() != (n, n) {
        return Err(Error::Dimension(
            "operator and matrix dimensions differ".into(),
        ));
    }
    let (ar, al) = (&ur.matrix_part, &ul.matrix_part);
    let s = scale_of(h);
    let right = frobenius(&(h.dot(ar) - ar.dot(&h.t()))) / s;
    let left = frobenius(&(al.dot(&conj(h)) - adjoint(h).dot(al))) / s;
    Ok(IntertwiningReport { right, left })
}

/// Relative errors of the four swap identities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapReport {
    /// Υ^R ψ^L_2 = ψ^R_1.
    pub r_on_l2: f64,
    /// Υ^R ψ^L_1 = −ψ^R_2.
    pub r_on_l1: f64,
    /// Υ^L ψ^R_2 = ψ^L_1.
    pub l_on_r2: f64,
    /// Υ^L ψ^R_1 = −ψ^L_2.
    pub l_on_r1: f64,
}

impl SwapReport {
    pub fn max(&self) -> f64 {
        self.r_on_l2
            .max(self.r_on_l1)
            .max(self.l_on_r2)
            .max(self.l_on_r1)
    }
}

fn rel_diff(a: &ComplexVec, b: &ComplexVec) -> f64 {
    vec_norm((a - b).view()) / vec_norm(b.view()).max(f64::MIN_POSITIVE)
}

pub fn verify_swap_action(
    sub: &DegenerateSubspace,
    ur: &AntiunitaryOperator,
    ul: &AntiunitaryOperator,
) -> SwapReport {
    let neg = |v: &ComplexVec| v.mapv(|z| -z);
    SwapReport {
        r_on_l2: rel_diff(&ur.apply(sub.psi_l2.view()), &sub.psi_r1),
        r_on_l1: rel_diff(&ur.apply(sub.psi_l1.view()), &neg(&sub.psi_r2)),
        l_on_r2: rel_diff(&ul.apply(sub.psi_r2.view()), &sub.psi_l1),
        l_on_r1: rel_diff(&ul.apply(sub.psi_r1.view()), &neg(&sub.psi_l2)),
    }
}

/// Normalized overlaps that the construction forces to vanish.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    /// |⟨ψ^L_1|Υ^R ψ^L_1⟩| / (‖ψ^L_1‖·‖Υ^R ψ^L_1‖).
    pub left: f64,
    /// |⟨ψ^R_1|Υ^L ψ^R_1⟩| / (‖ψ^R_1‖·‖Υ^L ψ^R_1‖).
    pub right: f64,
}

fn normalized_overlap(a: &ComplexVec, b: &ComplexVec) -> f64 {
    let d = vec_norm(a.view()) * vec_norm(b.view());
    if d == 0.0 {
        0.0
    } else {
        inner(a.view(), b.view()).norm() / d
    }
}

pub fn verify_orthogonality(
    sub: &DegenerateSubspace,
    ur: &AntiunitaryOperator,
    ul: &AntiunitaryOperator,
) -> OrthogonalityReport {
    OrthogonalityReport {
        left: normalized_overlap(&sub.psi_l1, &ur.apply(sub.psi_l1.view())),
        right: normalized_overlap(&sub.psi_r1, &ul.apply(sub.psi_r1.view())),
    }
}

/// Product-law residuals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductReport {
    /// ‖A_R conj(A_L) + P‖ / ‖P‖ with P the biorthogonal projector on the pair.
    pub right_left: f64,
    /// ‖A_L conj(A_R) + P†‖ / ‖P‖.
    pub left_right: f64,
    /// max_i ‖Υ^R Υ^L ψ^R_i + ψ^R_i‖: the product is −𝟙 on the degenerate span.
    pub on_subspace: f64,
    /// ‖A_R conj(A_L) + 𝟙‖ / √N, the literal identity. Holds only for N = 2.
    pub full_identity: f64,
}

pub fn verify_product_law(
    sub: &DegenerateSubspace,
    ur: &AntiunitaryOperator,
    ul: &AntiunitaryOperator,
) -> ProductReport {
    let n = sub.dim();
    let p = sub.projector();
    let pn = frobenius(&p).max(f64::MIN_POSITIVE);
    let rl = ur.compose(ul);
    let lr = ul.compose(ur);
    let on_subspace = [&sub.psi_r1, &sub.psi_r2]
        .iter()
        .map(|v| rel_diff(&rl.dot(*v), &v.mapv(|z| -z)))
        .fold(0.0, f64::max);
    ProductReport {
        right_left: frobenius(&(&rl + &p)) / pn,
        left_right: frobenius(&(&lr + &adjoint(&p))) / pn,
        on_subspace,
        full_identity: frobenius(&(&rl + &identity(n))) / (n as f64).sqrt(),
    }
}

/// Biorthogonal anti-unitarity on the span: ⟨ψ^L_a|ψ^R_b⟩ = ⟨Υ^L ψ^R_b|Υ^R ψ^L_a⟩.
pub fn verify_antiunitarity(
    sub: &DegenerateSubspace,
    ur: &AntiunitaryOperator,
    ul: &AntiunitaryOperator,
) -> f64 {
    let mut worst: f64 = 0.0;
    for la in sub.left() {
        for rb in sub.right() {
            let lhs = inner(la, rb);
            let rhs = inner(ul.apply(rb).view(), ur.apply(la).view());
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}

/// ‖H(Υ^R ψ^L_1) − λ₀(Υ^R ψ^L_1)‖ / (‖H‖·‖Υ^R ψ^L_1‖).
pub fn verify_eigen_preservation(
    h: &ComplexMat,
    sub: &DegenerateSubspace,
    ur: &AntiunitaryOperator,
) -> f64 {
    let w = ur.apply(sub.psi_l1.view());
    let r = h.dot(&w) - w.mapv(|z| z * sub.lambda0);
    vec_norm(r.view()) / (scale_of(h) * vec_norm(w.view()).max(f64::MIN_POSITIVE))
}

/// Every relation of the construction for one matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub dim: usize,
    pub lambda0: Complex64,
    pub intertwining: IntertwiningReport,
    pub product: ProductReport,
    pub swap: SwapReport,
    pub orthogonality: OrthogonalityReport,
    pub antiunitarity: f64,
    pub eigen_preservation: f64,
}

impl TheoremReport {
    /// Largest residual over all relations that hold in every dimension.
    pub fn max_residual(&self) -> f64 {
        [
            self.intertwining.right,
            self.intertwining.left,
            self.product.right_left,
            self.product.left_right,
            self.product.on_subspace,
            self.swap.max(),
            self.orthogonality.left,
            self.orthogonality.right,
            self.antiunitarity,
            self.eigen_preservation,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        let literal = self.dim != 2 || self.product.full_identity <= tol;
        self.max_residual() <= tol && literal
    }
}

/// Runs the full pipeline on `h`: eigensystem, pair extraction, operators, checks.
pub fn verify_theorem(h: &ComplexMat, hint: Option<Complex64>) -> Result<TheoremReport> {
    let es = eigensystem_n(h, 1e-6)?;
    let sub = extract_subspace(h, &es, hint)?;
    verify_subspace(h, &sub)
}

/// Builds the operator pair of `sub` and measures every relation.
pub fn verify_subspace(h: &ComplexMat, sub: &DegenerateSubspace) -> Result<TheoremReport> {
    let ur = make_upsilon_right(sub)?;
    let ul = make_upsilon_left(sub)?;
    Ok(TheoremReport {
        dim: sub.dim(),
        lambda0: sub.lambda0,
        intertwining: verify_intertwining(h, &ur, &ul)?,
        product: verify_product_law(sub, &ur, &ul),
        swap: verify_swap_action(sub, &ur, &ul),
        orthogonality: verify_orthogonality(sub, &ur, &ul),
        antiunitarity: verify_antiunitarity(sub, &ur, &ul),
        eigen_preservation: verify_eigen_preservation(h, sub, &ur),
    })
}

/// Largest Frobenius condition number accepted for the random similarity.
pub const MAX_CONDITION: f64 = 1e3;

/// Minimum spacing between distinct eigenvalues of generated matrices.
pub const MIN_GAP: f64 = 0.1;

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_similarity(n: usize, rng: &mut ChaCha8Rng) -> (ComplexMat, ComplexMat) {
    loop {
        let s = ComplexMat::from_shape_fn((n, n), |_| random_complex(rng));
        if let Ok(si) = inverse(&s) {
            if frobenius(&s) * frobenius(&si) < MAX_CONDITION {
                return (s, si);
            }
        }
    }
}

fn random_spectrum(n: usize, lambda0: Complex64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let mut vals = vec![lambda0, lambda0];
    while vals.len() < n {
        let cand = lambda0 + random_complex(rng) * 2.0;
        if vals.iter().all(|v| (v - cand).norm() >= MIN_GAP) {
            vals.push(cand);
        }
    }
    vals
}

/// H = S Λ S⁻¹ with λ₀ exactly twice in Λ; λ₀·𝟙 when `dim` = 2.
pub fn random_degenerate_hamiltonian(
    dim: usize,
    seed: u64,
    lambda0: Complex64,
) -> Result<ComplexMat> {
    if dim < 2 {
        return Err(Error::Dimension(format!(
            "degenerate pair needs dim >= 2, got {dim}"
        )));
    }
    if dim == 2 {
        return Ok(identity(2).mapv(|z| z * lambda0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (s, si) = random_similarity(dim, &mut rng);
    let vals = random_spectrum(dim, lambda0, &mut rng);
    let d = ComplexMat::from_diag(&Array1::from(vals));
    Ok(s.dot(&d).dot(&si))
}

/// Same construction with a 2×2 Jordan block at λ₀: a defective degeneracy.
pub fn random_defective_hamiltonian(
    dim: usize,
    seed: u64,
    lambda0: Complex64,
) -> Result<ComplexMat> {
    if dim < 2 {
        return Err(Error::Dimension(format!(
            "defective pair needs dim >= 2, got {dim}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (s, si) = random_similarity(dim, &mut rng);
    let vals = random_spectrum(dim, lambda0, &mut rng);
    let mut d = ComplexMat::from_diag(&Array1::from(vals));
    d[[0, 1]] = cx(1.0, 0.0);
    Ok(s.dot(&d).dot(&si))
}

/// One member of a theorem ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub dim: usize,
    pub passed: bool,
    pub max_residual: Option<f64>,
    pub report: Option<TheoremReport>,
    pub error: Option<String>,
}

/// Ensemble configuration: trial i uses dim = dims.0 + i mod (dims.1 − dims.0 + 1)
/// and seed = base_seed + i.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub dims: (usize, usize),
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub defective: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub config: EnsembleConfig,
    pub passed: bool,
    pub max_residual: f64,
    pub first_failure: Option<u64>,
    pub trials: Vec<TrialRecord>,
}

fn trial_lambda0(seed: u64) -> Complex64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_1a4b_da00);
    random_complex(&mut rng)
}

fn run_trial(cfg: &EnsembleConfig, i: usize) -> TrialRecord {
    let span = cfg.dims.1 - cfg.dims.0 + 1;
    let dim = cfg.dims.0 + i % span;
    let seed = cfg.seed.wrapping_add(i as u64);
    let lambda0 = trial_lambda0(seed);
    let built = if cfg.defective {
        random_defective_hamiltonian(dim, seed, lambda0)
    } else {
        random_degenerate_hamiltonian(dim, seed, lambda0)
    };
    let outcome = built.and_then(|h| verify_theorem(&h, Some(lambda0)));
    match outcome {
        Ok(report) => TrialRecord {
            seed,
            dim,
            passed: report.passes(cfg.tol),
            max_residual: Some(report.max_residual()),
            report: Some(report),
            error: None,
        },
        Err(e) => TrialRecord {
            seed,
            dim,
            passed: false,
            max_residual: None,
            report: None,
            error: Some(e.to_string()),
        },
    }
}

/// Runs the theorem pipeline over an engineered ensemble, in parallel with ordered output.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<EnsembleReport> {
    if cfg.dims.0 < 2 || cfg.dims.1 < cfg.dims.0 {
        return Err(Error::Precondition(format!(
            "dimension range {:?} must satisfy 2 <= lo <= hi",
            cfg.dims
        )));
    }
    let trials: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, i))
        .collect();
    let max_residual = trials
        .iter()
        .filter_map(|t| t.max_residual)
        .fold(0.0, f64::max);
    let first_failure = trials.iter().find(|t| !t.passed).map(|t| t.seed);
    Ok(EnsembleReport {
        config: *cfg,
        passed: first_failure.is_none(),
        max_residual,
        first_failure,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::eigensystem2;
    use crate::model::{bloch_hamiltonian, ModelParams, Momentum};

    fn canonical() -> DegenerateSubspace {
        let e1 = Array1::from(vec![cx(1.0, 0.0), cx(0.0, 0.0)]);
        let e2 = Array1::from(vec![cx(0.0, 0.0), cx(1.0, 0.0)]);
        DegenerateSubspace::new(
            &ComplexMat::zeros((2, 2)),
            cx(0.0, 0.0),
            [e1.clone(), e2.clone()],
            [e1, e2],
        )
        .unwrap()
    }

    #[test]
    fn canonical_basis_gives_i_sigma_y() {
        let sub = canonical();
        let want = crate::algebra::mat2(cx(0.0, 0.0), cx(1.0, 0.0), cx(-1.0, 0.0), cx(0.0, 0.0));
        let ur = make_upsilon_right(&sub).unwrap();
        let ul = make_upsilon_left(&sub).unwrap();
        assert_eq!(ur.matrix_part, want);
        assert_eq!(ul.matrix_part, want);
        let rep = verify_subspace(&ComplexMat::zeros((2, 2)), &sub).unwrap();
        assert_eq!(rep.max_residual(), 0.0);
        assert_eq!(rep.product.full_identity, 0.0);
    }

    #[test]
    fn rejects_non_biorthogonal_input() {
        let e1 = Array1::from(vec![cx(1.0, 0.0), cx(0.0, 0.0)]);
        let e2 = Array1::from(vec![cx(0.0, 0.0), cx(1.0, 0.0)]);
        let err = DegenerateSubspace::new(
            &ComplexMat::zeros((2, 2)),
            cx(0.0, 0.0),
            [e1.clone(), e2.clone()],
            [e1.clone(), e1],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotBiorthogonal { .. }));
    }

    #[test]
    fn x_point_of_nearest_neighbour_model() {
        let p = ModelParams {
            gamma: 0.5,
            gx: 0.5,
            gy: 0.3,
            ..Default::default()
        };
        let h = bloch_hamiltonian(&p, Momentum::x1());
        let es = eigensystem2(&h, 1e-12).unwrap();
        let sub = extract_subspace(&h, &es, None).unwrap();
        let rep = verify_subspace(&h, &sub).unwrap();
        assert!(rep.max_residual() < 1e-12);
    }

    #[test]
    fn engineered_matrices_pass() {
        for (dim, seed) in [(4, 1), (6, 2), (8, 3), (5, 7)] {
            let l0 = cx(0.3, -0.2);
            let h = random_degenerate_hamiltonian(dim, seed, l0).unwrap();
            let es = eigensystem_n(&h, 1e-8).unwrap();
            assert!(!es.defective);
            let close = es
                .eigenvalues
                .iter()
                .filter(|z| (*z - l0).norm() < 1e-7)
                .count();
            assert_eq!(close, 2);
            let rep = verify_theorem(&h, Some(l0)).unwrap();
            assert!(rep.passes(THEOREM_TOL), "{rep:?}");
            assert!(rep.product.full_identity > 0.1);
        }
    }

    #[test]
    fn generator_is_deterministic_and_trivial_in_dim2() {
        let l0 = cx(1.0, 2.0);
        assert_eq!(
            random_degenerate_hamiltonian(2, 9, l0).unwrap(),
            identity(2).mapv(|z| z * l0)
        );
        assert_eq!(
            random_degenerate_hamiltonian(6, 9, l0).unwrap(),
            random_degenerate_hamiltonian(6, 9, l0).unwrap()
        );
        assert!(random_degenerate_hamiltonian(1, 9, l0).is_err());
    }

    #[test]
    fn hermitian_reduction() {
        let mut h = ComplexMat::zeros((3, 3));
        h[[0, 0]] = cx(1.0, 0.0);
        h[[1, 1]] = cx(1.0, 0.0);
        h[[2, 2]] = cx(-2.0, 0.0);
        h[[0, 2]] = cx(0.0, 0.0);
        let es = eigensystem_n(&h, 1e-10).unwrap();
        let sub = extract_subspace(&h, &es, None).unwrap();
        let ur = make_upsilon_right(&sub).unwrap();
        let ul = make_upsilon_left(&sub).unwrap();
        assert!(frobenius(&(ur.matrix_part - ul.matrix_part)) < 1e-12);
    }

    #[test]
    fn intertwining_grows_with_perturbation() {
        let l0 = cx(0.0, 0.5);
        let h = random_degenerate_hamiltonian(5, 4, l0).unwrap();
        let rep = verify_theorem(&h, Some(l0)).unwrap();
        let es = eigensystem_n(&h, 1e-8).unwrap();
        let sub = extract_subspace(&h, &es, Some(l0)).unwrap();
        let ur = make_upsilon_right(&sub).unwrap();
        let ul = make_upsilon_left(&sub).unwrap();
        let mut pert = ComplexMat::zeros((5, 5));
        pert[[0, 3]] = cx(1.0, 0.0);
        let mut last = rep.intertwining.right;
        for eps in [1e-6, 1e-4, 1e-2] {
            let hp = &h + &pert.mapv(|z| z * eps);
            let r = verify_intertwining(&hp, &ur, &ul).unwrap().right;
            assert!(r > last);
            last = r;
        }
    }

    #[test]
    fn defective_input_is_rejected() {
        let h = random_defective_hamiltonian(4, 3, cx(0.0, 0.0)).unwrap();
        assert!(verify_theorem(&h, Some(cx(0.0, 0.0))).is_err());
    }

    #[test]
    fn ensemble_is_ordered_and_passes() {
        let cfg = EnsembleConfig {
            dims: (2, 8),
            trials: 21,
            seed: 100,
            tol: THEOREM_TOL,
            defective: false,
        };
        let rep = run_ensemble(&cfg).unwrap();
        assert!(rep.passed, "{:?}", rep.first_failure);
        let seeds: Vec<u64> = rep.trials.iter().map(|t| t.seed).collect();
        assert_eq!(seeds, (100..121).collect::<Vec<_>>());
        let empty = run_ensemble(&EnsembleConfig { trials: 0, ..cfg }).unwrap();
        assert!(empty.passed && empty.trials.is_empty());
    }
}
