//! Dense complex eigensolver: Householder reduction to Hessenberg form,
//! implicitly shifted complex QR to Schur form, eigenvectors by
//! back-substitution. Left vectors come from the adjoint problem.

use num_complex::Complex64;

use super::{
    adjoint, cmp_re_im, frobenius, inner, pair_residual, validate, vec_norm, ComplexMat,
    Eigensystem, RightEigensystem, DEFECTIVE_TOL, EPS,
};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest dimension accepted by the dense contract.
pub const MAX_DIM: usize = 2048;

/// Relative radius within which eigenvalues are treated as one cluster.
pub(crate) const CLUSTER_RADIUS: f64 = 1e-7;

struct Dense {
    n: usize,
    a: Vec<Complex64>,
}

impl Dense {
    fn from_mat(m: &ComplexMat) -> Self {
        let n = m.nrows();
        Dense {
            n,
            a: m.iter().copied().collect(),
        }
    }

    fn identity(n: usize) -> Self {
        let mut a = vec![ZERO; n * n];
        for i in 0..n {
            a[i * n + i] = ONE;
        }
        Dense { n, a }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.a[i * self.n + j] = z;
    }

    fn to_mat(&self) -> ComplexMat {
        ComplexMat::from_shape_vec((self.n, self.n), self.a.clone()).expect("square buffer")
    }

    fn norm(&self) -> f64 {
        self.a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Householder reduction A → Qᴴ A Q in upper Hessenberg form (Q accumulated if given).
fn hessenberg(h: &mut Dense, mut q: Option<&mut Dense>) {
    let n = h.n;
    let mut v = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let norm = (k + 1..n)
            .map(|i| h.at(i, k).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h.at(k + 1, k);
        let phase = if x0.norm() == 0.0 {
            ONE
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        for i in k + 1..n {
            v[i] = h.at(i, k);
        }
        v[k + 1] -= alpha;
        let vn2: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum();
        if vn2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vn2;
        // H ← (I − β v vᴴ) H
        for j in k..n {
            let s: Complex64 = (k + 1..n).map(|i| v[i].conj() * h.at(i, j)).sum();
            let s = s * beta;
            for i in k + 1..n {
                let z = h.at(i, j) - v[i] * s;
                h.set(i, j, z);
            }
        }
        // H ← H (I − β v vᴴ)
        for i in 0..n {
            let s: Complex64 = (k + 1..n).map(|j| h.at(i, j) * v[j]).sum();
            let s = s * beta;
            for j in k + 1..n {
                let z = h.at(i, j) - s * v[j].conj();
                h.set(i, j, z);
            }
        }
        if let Some(q) = q.as_deref_mut() {
            for i in 0..n {
                let s: Complex64 = (k + 1..n).map(|j| q.at(i, j) * v[j]).sum();
                let s = s * beta;
                for j in k + 1..n {
                    let z = q.at(i, j) - s * v[j].conj();
                    q.set(i, j, z);
                }
            }
        }
        h.set(k + 1, k, alpha);
        for i in k + 2..n {
            h.set(i, k, ZERO);
        }
    }
}

/// Givens rotation G = [[c, s], [−s̄, c]] with G·(x, y)ᵀ = (r, 0)ᵀ.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    if y == ZERO {
        return (1.0, ZERO);
    }
    let ax = x.norm();
    let r = x.norm().hypot(y.norm());
    if ax == 0.0 {
        return (0.0, y.conj() / y.norm());
    }
    let c = ax / r;
    let s = (x / ax) * y.conj() / r;
    (c, s)
}

fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let m = (a + d) * 0.5;
    let disc = (((a - d) * 0.5) * ((a - d) * 0.5) + b * c).sqrt();
    let (l1, l2) = (m + disc, m - disc);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Reduces `t` (Hessenberg) to upper triangular Schur form in place.
fn schur_qr(t: &mut Dense, mut z: Option<&mut Dense>) -> Result<usize> {
    let n = t.n;
    if n == 1 {
        return Ok(0);
    }
    let anorm = t.norm().max(f64::MIN_POSITIVE);
    let cap = 60 * n + 100;
    let mut total = 0usize;
    let mut its = 0usize;
    let mut hi = n - 1;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let s = t.at(l - 1, l - 1).norm() + t.at(l, l).norm();
            let s = if s == 0.0 { anorm } else { s };
            if t.at(l, l - 1).norm() <= EPS * s {
                t.set(l, l - 1, ZERO);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        total += 1;
        if total > cap {
            let residual = (1..n).map(|i| t.at(i, i - 1).norm()).fold(0.0, f64::max);
            return Err(Error::NoConvergence {
                iterations: total,
                residual,
            });
        }
        let mu = if its.is_multiple_of(10) {
            t.at(hi, hi) + Complex64::new(0.75 * t.at(hi, hi - 1).norm(), 0.0)
        } else {
            wilkinson(
                t.at(hi - 1, hi - 1),
                t.at(hi - 1, hi),
                t.at(hi, hi - 1),
                t.at(hi, hi),
            )
        };
        let mut x = t.at(l, l) - mu;
        let mut y = t.at(l + 1, l);
        for k in l..hi {
            if k > l {
                x = t.at(k, k - 1);
                y = t.at(k + 1, k - 1);
            }
            let (c, s) = givens(x, y);
            let start = if k > l { k - 1 } else { l };
            for j in start..n {
                let (a, b) = (t.at(k, j), t.at(k + 1, j));
                t.set(k, j, a * c + s * b);
                t.set(k + 1, j, -s.conj() * a + b * c);
            }
            let last = (k + 2).min(hi);
            for i in 0..=last {
                let (a, b) = (t.at(i, k), t.at(i, k + 1));
                t.set(i, k, a * c + b * s.conj());
                t.set(i, k + 1, -a * s + b * c);
            }
            if let Some(z) = z.as_deref_mut() {
                for i in 0..n {
                    let (a, b) = (z.at(i, k), z.at(i, k + 1));
                    z.set(i, k, a * c + b * s.conj());
                    z.set(i, k + 1, -a * s + b * c);
                }
            }
            if k > l {
                t.set(k + 1, k - 1, ZERO);
            }
        }
    }
    Ok(total)
}

/// Eigenvalues only (no vectors), sorted by (Re, Im).
pub fn eigenvalues_n(h: &ComplexMat) -> Result<Vec<Complex64>> {
    let n = validate(h)?;
    if n > MAX_DIM {
        return Err(Error::Dimension(format!("dimension {n} exceeds {MAX_DIM}")));
    }
    let mut t = Dense::from_mat(h);
    hessenberg(&mut t, None);
    schur_qr(&mut t, None)?;
    let mut lams: Vec<Complex64> = (0..n).map(|i| t.at(i, i)).collect();
    lams.sort_by(cmp_re_im);
    Ok(lams)
}

/// Right eigenvectors of `h` via Schur form, one unit column per eigenvalue.
fn right_eigen(h: &ComplexMat) -> Result<(Vec<Complex64>, ComplexMat)> {
    let n = h.nrows();
    let mut t = Dense::from_mat(h);
    let mut z = Dense::identity(n);
    hessenberg(&mut t, Some(&mut z));
    schur_qr(&mut t, Some(&mut z))?;

    let lams: Vec<Complex64> = (0..n).map(|i| t.at(i, i)).collect();
    let hnorm = frobenius(h).max(f64::MIN_POSITIVE);
    let tnorm = t.norm().max(f64::MIN_POSITIVE);
    let smin = (EPS * tnorm).max(f64::MIN_POSITIVE);
    let cluster = CLUSTER_RADIUS * hnorm;
    let accept = 1e3 * EPS * hnorm * (n as f64);
    let zm = z.to_mat();

    let mut vecs = ComplexMat::zeros((n, n));
    let mut y = vec![ZERO; n];
    for k in 0..n {
        // First treat Schur entries in the same cluster as exactly degenerate;
        // fall back to the perturbed solve when that is not an eigenvector.
        let mut best: Option<(f64, ndarray::Array1<Complex64>)> = None;
        for clustered in [true, false] {
            for yi in y.iter_mut() {
                *yi = ZERO;
            }
            y[k] = ONE;
            for i in (0..k).rev() {
                let s: Complex64 = (i + 1..=k).map(|j| t.at(i, j) * y[j]).sum();
                let mut d = t.at(i, i) - lams[k];
                if clustered && d.norm() <= cluster {
                    y[i] = ZERO;
                    continue;
                }
                if d.norm() < smin {
                    d = Complex64::new(smin, 0.0);
                }
                y[i] = -s / d;
                let m = y[i].norm();
                if m > 1e100 {
                    for yj in y.iter_mut().take(k + 1).skip(i) {
                        *yj /= m;
                    }
                }
            }
            let yv = ndarray::Array1::from(y.clone());
            let mut x = zm.dot(&yv);
            let nx = vec_norm(x.view());
            x.mapv_inplace(|v| v / nx);
            let r = h.dot(&x) - x.mapv(|v| v * lams[k]);
            let res = vec_norm(r.view());
            let better = best.as_ref().is_none_or(|(b, _)| res < *b);
            if better {
                best = Some((res, x));
            }
            if res <= accept {
                break;
            }
        }
        let (_, x) = best.expect("at least one candidate");
        vecs.column_mut(k).assign(&x);
    }
    Ok((lams, vecs))
}

/// Connected components of eigenvalues under |λ_i − λ_j| ≤ radius.
pub(crate) fn clusters(lams: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = lams.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut head = 0;
        while head < comp.len() {
            let i = comp[head];
            head += 1;
            for j in 0..n {
                if !seen[j] && (lams[i] - lams[j]).norm() <= radius {
                    seen[j] = true;
                    comp.push(j);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Eigenvalues in canonical order with their unit right eigenvectors.
fn sorted_right_eigen(h: &ComplexMat) -> Result<(Vec<Complex64>, ComplexMat)> {
    let n = h.nrows();
    let (lams_raw, right_raw) = right_eigen(h)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp_re_im(&lams_raw[a], &lams_raw[b]));
    let lams: Vec<Complex64> = order.iter().map(|&i| lams_raw[i]).collect();
    let mut right = ComplexMat::zeros((n, n));
    for (c, &i) in order.iter().enumerate() {
        right.column_mut(c).assign(&right_raw.column(i));
    }
    Ok((lams, right))
}

/// Whether two right vectors of a cluster are parallel within the defective tolerance.
fn coalescing(right: &ComplexMat, comp: &[usize]) -> bool {
    comp.iter().enumerate().any(|(a, &i)| {
        comp[a + 1..]
            .iter()
            .any(|&j| inner(right.column(i), right.column(j)).norm() > 1.0 - DEFECTIVE_TOL)
    })
}

/// Eigenvalues and right eigenvectors only.
///
/// For strongly non-normal matrices the eigenvalues of H and H† computed
/// separately can differ far beyond rounding, which makes pairing left
/// vectors unreliable. Callers that need only right vectors use this path;
/// the residual covers right vectors alone.
pub fn right_eigensystem(h: &ComplexMat, tol: f64) -> Result<RightEigensystem> {
    let n = validate(h)?;
    if n > MAX_DIM {
        return Err(Error::Dimension(format!("dimension {n} exceeds {MAX_DIM}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let (lams, right) = sorted_right_eigen(h)?;
    let hnorm = frobenius(h).max(f64::MIN_POSITIVE);
    let defective = clusters(&lams, CLUSTER_RADIUS * hnorm)
        .iter()
        .any(|comp| coalescing(&right, comp));
    let mut residual = 0.0f64;
    for (c, &lam) in lams.iter().enumerate() {
        let r = right.column(c);
        let rr = h.dot(&r) - r.mapv(|z| z * lam);
        residual = residual.max(vec_norm(rr.view()) / vec_norm(r).max(f64::MIN_POSITIVE));
    }
    if residual > tol * hnorm {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual,
        });
    }
    Ok(RightEigensystem {
        eigenvalues: lams,
        right_vectors: right,
        residual,
        defective,
    })
}

/// General dense eigensystem with biorthogonally normalized left vectors.
///
/// Left vectors solve the adjoint problem and are paired to right vectors by
/// choosing, for each λ, the unused adjoint eigenvalue λ′ minimizing
/// |λ − λ′*|. Within each eigenvalue cluster the left block is corrected by
/// the inverse Gram matrix so that ⟨ψ^L_m|ψ^R_n⟩ = δ_mn.
pub fn eigensystem_n(h: &ComplexMat, tol: f64) -> Result<Eigensystem> {
    let n = validate(h)?;
    if n > MAX_DIM {
        return Err(Error::Dimension(format!("dimension {n} exceeds {MAX_DIM}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let (lams, right) = sorted_right_eigen(h)?;
    let (mus, left_raw) = right_eigen(&adjoint(h))?;

    let mut used = vec![false; n];
    let mut left = ComplexMat::zeros((n, n));
    for (c, lam) in lams.iter().enumerate() {
        let j = (0..n)
            .filter(|&j| !used[j])
            .min_by(|&a, &b| {
                (lam - mus[a].conj())
                    .norm()
                    .total_cmp(&(lam - mus[b].conj()).norm())
            })
            .expect("one unused adjoint eigenvalue per right eigenvalue");
        used[j] = true;
        left.column_mut(c).assign(&left_raw.column(j));
    }

    let hnorm = frobenius(h).max(f64::MIN_POSITIVE);
    let mut defective = false;
    for comp in clusters(&lams, CLUSTER_RADIUS * hnorm) {
        let m = comp.len();
        defective |= coalescing(&right, &comp);
        let mut g = ComplexMat::zeros((m, m));
        for (a, &ia) in comp.iter().enumerate() {
            for (b, &ib) in comp.iter().enumerate() {
                g[[a, b]] = inner(left.column(ia), right.column(ib));
            }
        }
        let ginv = match inverse(&g) {
            Ok(gi) if gi.iter().all(|z| z.norm() < 1.0 / DEFECTIVE_TOL) => gi,
            _ => {
                defective = true;
                continue;
            }
        };
        let gih = adjoint(&ginv);
        let mut block = ComplexMat::zeros((n, m));
        for (a, &ia) in comp.iter().enumerate() {
            block.column_mut(a).assign(&left.column(ia));
        }
        let corrected = block.dot(&gih);
        for (a, &ia) in comp.iter().enumerate() {
            left.column_mut(ia).assign(&corrected.column(a));
        }
    }

    let residual = pair_residual(h, &lams, &right, &left);
    if residual > tol * hnorm {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual,
        });
    }
    Ok(Eigensystem {
        eigenvalues: lams,
        right_vectors: right,
        left_vectors: left,
        residual,
        defective,
    })
}

/// Solves A X = B by Gaussian elimination with partial pivoting.
pub fn solve(a: &ComplexMat, b: &ComplexMat) -> Result<ComplexMat> {
    let n = validate(a)?;
    if b.nrows() != n {
        return Err(Error::Dimension("right-hand side rows differ".into()));
    }
    let m = b.ncols();
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = frobenius(a).max(f64::MIN_POSITIVE);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| lu[[i, k]].norm().total_cmp(&lu[[j, k]].norm()))
            .expect("nonempty pivot range");
        if lu[[p, k]].norm() <= 1e-14 * scale {
            return Err(Error::Precondition(
                "matrix is singular to working precision".into(),
            ));
        }
        if p != k {
            for j in 0..n {
                lu.swap([k, j], [p, j]);
            }
            for j in 0..m {
                x.swap([k, j], [p, j]);
            }
        }
        let piv = lu[[k, k]];
        for i in k + 1..n {
            let f = lu[[i, k]] / piv;
            if f == ZERO {
                continue;
            }
            for j in k..n {
                let v = lu[[k, j]];
                lu[[i, j]] -= f * v;
            }
            for j in 0..m {
                let v = x[[k, j]];
                x[[i, j]] -= f * v;
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..m {
            let s: Complex64 = (k + 1..n).map(|i| lu[[k, i]] * x[[i, j]]).sum();
            x[[k, j]] = (x[[k, j]] - s) / lu[[k, k]];
        }
    }
    Ok(x)
}

pub fn inverse(a: &ComplexMat) -> Result<ComplexMat> {
    let n = validate(a)?;
    solve(a, &super::identity(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{cx, identity};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mat(n: usize, rng: &mut ChaCha8Rng) -> ComplexMat {
        ComplexMat::from_shape_fn((n, n), |_| {
            cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn diagonal_input() {
        let mut h = ComplexMat::zeros((2, 2));
        h[[0, 0]] = cx(1.0, 2.0);
        h[[1, 1]] = cx(3.0, 0.0);
        let es = eigensystem_n(&h, 1e-10).unwrap();
        assert_eq!(es.eigenvalues, vec![cx(1.0, 2.0), cx(3.0, 0.0)]);
        assert!((es.right(0)[0].norm() - 1.0).abs() < 1e-14);
        assert!((es.right(1)[1].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn similarity_construction_recovers_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 8;
        let s = random_mat(n, &mut rng);
        let sinv = inverse(&s).unwrap();
        let mut lam: Vec<Complex64> = (0..n)
            .map(|i| cx(i as f64 - 3.5, 0.5 * (i as f64).sin()))
            .collect();
        let mut d = ComplexMat::zeros((n, n));
        for i in 0..n {
            d[[i, i]] = lam[i];
        }
        let h = s.dot(&d).dot(&sinv);
        let es = eigensystem_n(&h, 1e-10).unwrap();
        lam.sort_by(cmp_re_im);
        for (a, b) in es.eigenvalues.iter().zip(&lam) {
            assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
        assert!(es.biorthogonality_error() < 1e-9);
        assert!(es.completeness_error() < 1e-8 * n as f64);
    }

    #[test]
    fn exact_double_eigenvalue_gets_independent_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 6;
        let s = random_mat(n, &mut rng);
        let sinv = inverse(&s).unwrap();
        let vals = [0.7, 0.7, -1.0, 2.0, cx(0.0, 1.0).re, 3.0];
        let mut d = ComplexMat::zeros((n, n));
        for i in 0..n {
            d[[i, i]] = cx(vals[i], if i == 4 { 1.0 } else { 0.0 });
        }
        let h = s.dot(&d).dot(&sinv);
        let es = eigensystem_n(&h, 1e-10).unwrap();
        assert!(!es.defective);
        assert!(es.biorthogonality_error() < 1e-9);
    }

    #[test]
    fn jordan_block_is_flagged() {
        let mut h = ComplexMat::zeros((3, 3));
        h[[0, 1]] = cx(1.0, 0.0);
        h[[2, 2]] = cx(2.0, 0.0);
        let es = eigensystem_n(&h, 1e-6).unwrap();
        assert!(es.defective);
    }

    #[test]
    fn solve_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_mat(5, &mut rng);
        let ai = inverse(&a).unwrap();
        let e = frobenius(&(a.dot(&ai) - identity(5)));
        assert!(e < 1e-12);
        assert!(inverse(&ComplexMat::zeros((2, 2))).is_err());
    }

    #[test]
    fn one_by_one() {
        let h = ComplexMat::from_elem((1, 1), cx(2.0, -1.0));
        let es = eigensystem_n(&h, 1e-12).unwrap();
        assert_eq!(es.eigenvalues, vec![cx(2.0, -1.0)]);
        assert!(es.biorthogonality_error() < 1e-15);
    }
}
