//! Ribbon spectra: one open axis of N cells, Bloch momentum along the other.
//!
//! A state counts as in-gap when its real part lies strictly inside the gap
//! of the periodic Bloch bands at the same transverse momentum, sampled at
//! [`GAP_SAMPLES`] points along the open direction. Everything else is bulk.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    cmp_re_im, coalescence_pair, eigensystem_n, frobenius, inner, right_eigensystem, vec_norm,
    CoalescenceReport, ComplexMat, RightEigensystem,
};
use crate::error::{Error, Result};
use crate::model::{dispersion, ribbon_hamiltonian, Axis, ModelParams, Momentum};
use crate::Complex64;

pub const MIN_CELLS: usize = 8;
pub const GAP_SAMPLES: usize = 256;
/// Eigensolver residual tolerance relative to ‖H‖.
pub const RIBBON_TOL: f64 = 1e-6;
/// Outer fraction of the ribbon on each side counted as an edge.
pub const EDGE_FRACTION: f64 = 0.25;
/// Radius, relative to max(1, ‖H‖), of the in-gap clusters that get edge resolution.
pub const PAIR_RADIUS: f64 = 1e-6;
/// Nearly coincident in-gap pairs are resolved only when their right vectors
/// are at most this parallel; above it the pair is treated as coalescing.
pub const RESOLVE_MAX_OVERLAP: f64 = 0.99;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Left,
    Right,
    Delocalized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeFlag {
    Left,
    Right,
    Bulk,
}

impl EdgeFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeFlag::Left => "left",
            EdgeFlag::Right => "right",
            EdgeFlag::Bulk => "bulk",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub ipr: f64,
    /// Weighted mean cell index, 0 ..= N−1.
    pub center_of_mass: f64,
    pub side: Location,
}

/// Inverse participation ratio and edge assignment of a ribbon vector of length 2N.
pub fn localization(vec: &[Complex64], n: usize) -> Result<LocalizationReport> {
    if n == 0 || vec.len() != 2 * n {
        return Err(Error::Dimension(format!(
            "vector length {} is not 2N for N = {n}",
            vec.len()
        )));
    }
    let w: Vec<f64> = vec.iter().map(|z| z.norm_sqr()).collect();
    let total: f64 = w.iter().sum();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::ZeroVector);
    }
    let ipr = w.iter().map(|x| x * x).sum::<f64>() / (total * total);
    let center_of_mass = (0..n).map(|c| c as f64 * (w[c] + w[n + c])).sum::<f64>() / total;
    let span = (n - 1) as f64;
    let side = if ipr <= 4.0 / n as f64 {
        Location::Delocalized
    } else if center_of_mass <= EDGE_FRACTION * span {
        Location::Left
    } else if center_of_mass >= (1.0 - EDGE_FRACTION) * span {
        Location::Right
    } else {
        Location::Delocalized
    };
    Ok(LocalizationReport {
        ipr,
        center_of_mass,
        side,
    })
}

fn momentum(axis: Axis, k_open: f64, kt: f64) -> Momentum {
    match axis {
        Axis::X => Momentum::new(k_open, kt),
        Axis::Y => Momentum::new(kt, k_open),
    }
}

/// Real-part gap (max Re ε_lower, min Re ε_upper) of the periodic bands at transverse momentum `kt`.
///
/// `None` when the real parts of the two bands overlap.
pub fn pbc_gap(p: &ModelParams, axis: Axis, kt: f64) -> Option<(f64, f64)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..GAP_SAMPLES {
        let k = -PI + 2.0 * PI * i as f64 / GAP_SAMPLES as f64;
        let (a, b) = dispersion(p, momentum(axis, k, kt));
        let (l, u) = if a.re <= b.re {
            (a.re, b.re)
        } else {
            (b.re, a.re)
        };
        lo = lo.max(l);
        hi = hi.min(u);
    }
    (lo < hi).then_some((lo, hi))
}

fn in_gap(gap: Option<(f64, f64)>, e: Complex64) -> bool {
    gap.is_some_and(|(lo, hi)| e.re > lo && e.re < hi)
}

/// Spectrum of the ribbon at one transverse momentum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RibbonBand {
    pub transverse_k: f64,
    /// Sorted ascending by real part, then imaginary part.
    pub eigenvalues: Vec<Complex64>,
    /// Unit right eigenvectors as columns, in eigenvalue order.
    #[serde(skip)]
    pub eigenvectors: ComplexMat,
    pub edge_flags: Vec<EdgeFlag>,
    pub in_gap: Vec<bool>,
    pub localization: Vec<LocalizationReport>,
    pub gap: Option<(f64, f64)>,
    pub residual: f64,
    pub defective: bool,
}

impl RibbonBand {
    pub fn in_gap_indices(&self) -> Vec<usize> {
        (0..self.eigenvalues.len())
            .filter(|&i| self.in_gap[i])
            .collect()
    }
}

/// Rotates each nearly degenerate, non-coalescing in-gap cluster onto the
/// eigenbasis of the cell-position operator restricted to its span.
///
/// Within such a cluster any combination is an eigenvector up to the
/// splitting, so the solver's basis is arbitrary; the position basis
/// separates modes living on different edges.
fn resolve_clusters(es: &mut RightEigensystem, flags: &[bool], n: usize, radius: f64) {
    let lams = es.eigenvalues.clone();
    let cand: Vec<usize> = (0..lams.len()).filter(|&i| flags[i]).collect();
    let mut seen = vec![false; cand.len()];
    for a in 0..cand.len() {
        if seen[a] {
            continue;
        }
        seen[a] = true;
        let mut comp = vec![cand[a]];
        for b in a + 1..cand.len() {
            if !seen[b]
                && comp
                    .iter()
                    .any(|&i| (lams[i] - lams[cand[b]]).norm() <= radius)
            {
                seen[b] = true;
                comp.push(cand[b]);
            }
        }
        if comp.len() < 2 {
            continue;
        }
        let coalescing = comp.iter().enumerate().any(|(x, &i)| {
            comp[x + 1..]
                .iter()
                .any(|&j| inner(es.right(i), es.right(j)).norm() > RESOLVE_MAX_OVERLAP)
        });
        if coalescing {
            continue;
        }
        // Orthonormal basis of the span (modified Gram–Schmidt).
        let m = comp.len();
        let mut q = ComplexMat::zeros((2 * n, m));
        for (c, &i) in comp.iter().enumerate() {
            let mut v = es.right(i).to_owned();
            for d in 0..c {
                let proj = inner(q.column(d), v.view());
                v = &v - &(q.column(d).to_owned() * proj);
            }
            let norm = vec_norm(v.view());
            q.column_mut(c).assign(&(v / Complex64::new(norm, 0.0)));
        }
        let mut x = ComplexMat::zeros((m, m));
        for a in 0..m {
            for b in 0..m {
                let mut s = Complex64::new(0.0, 0.0);
                for r in 0..2 * n {
                    let cell = (r % n) as f64;
                    s += q[[r, a]].conj() * q[[r, b]] * cell;
                }
                x[[a, b]] = s;
            }
        }
        let Ok(pos) = eigensystem_n(&x, RIBBON_TOL) else {
            continue;
        };
        let rotated = q.dot(&pos.right_vectors);
        // Keep the eigenvalue order: the lower-index slot gets the mode nearer cell 0.
        for (c, &i) in comp.iter().enumerate() {
            let v = rotated.column(c);
            let norm = vec_norm(v);
            es.right_vectors
                .column_mut(i)
                .assign(&(v.to_owned() / Complex64::new(norm, 0.0)));
        }
    }
}

fn band_from(p: &ModelParams, axis: Axis, n: usize, kt: f64, resolve: bool) -> Result<RibbonBand> {
    let h = ribbon_hamiltonian(p, axis, n, kt)?;
    let mut es = right_eigensystem(&h, RIBBON_TOL)?;
    let gap = pbc_gap(p, axis, kt);
    let in_gap: Vec<bool> = es.eigenvalues.iter().map(|&e| in_gap(gap, e)).collect();
    if resolve {
        let radius = PAIR_RADIUS * frobenius(&h).max(1.0);
        resolve_clusters(&mut es, &in_gap, n, radius);
    }
    let mut localization_reports = Vec::with_capacity(2 * n);
    let mut edge_flags = Vec::with_capacity(2 * n);
    for (i, &gapped) in in_gap.iter().enumerate() {
        let v: Vec<Complex64> = es.right(i).to_vec();
        let loc = localization(&v, n)?;
        edge_flags.push(match (gapped, loc.side) {
            (true, Location::Left) => EdgeFlag::Left,
            (true, Location::Right) => EdgeFlag::Right,
            _ => EdgeFlag::Bulk,
        });
        localization_reports.push(loc);
    }
    Ok(RibbonBand {
        transverse_k: kt,
        eigenvalues: es.eigenvalues,
        eigenvectors: es.right_vectors,
        edge_flags,
        in_gap,
        localization: localization_reports,
        gap,
        residual: es.residual,
        defective: es.defective,
    })
}

fn check_cells(n: usize) -> Result<()> {
    if n < MIN_CELLS {
        return Err(Error::Dimension(format!(
            "ribbon width {n} is smaller than {MIN_CELLS}"
        )));
    }
    Ok(())
}

/// Ribbon band at a single transverse momentum.
pub fn ribbon_band(p: &ModelParams, axis: Axis, n: usize, kt: f64) -> Result<RibbonBand> {
    check_cells(n)?;
    band_from(p, axis, n, kt, true)
}

/// Transverse momenta k_j = −π + 2πj/k_samples.
pub fn transverse_grid(k_samples: usize) -> Vec<f64> {
    (0..k_samples)
        .map(|j| -PI + 2.0 * PI * j as f64 / k_samples as f64)
        .collect()
}

pub fn ribbon_spectrum(
    p: &ModelParams,
    axis: Axis,
    n: usize,
    k_samples: usize,
) -> Result<Vec<RibbonBand>> {
    check_cells(n)?;
    if k_samples == 0 {
        return Err(Error::Dimension("k_samples must be positive".into()));
    }
    transverse_grid(k_samples)
        .into_par_iter()
        .map(|kt| band_from(p, axis, n, kt, true))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroPair {
    pub indices: (usize, usize),
    pub eigenvalues: (Complex64, Complex64),
    pub coalescence: CoalescenceReport,
}

/// Coalescence of the two eigenvectors whose eigenvalues are nearest zero.
///
/// `None` when those two states are not both inside the periodic gap. The
/// raw solver vectors are used, without edge resolution.
pub fn obc_defective_check(
    p: &ModelParams,
    axis: Axis,
    n: usize,
    kt: f64,
) -> Result<Option<ZeroPair>> {
    p.validate()?;
    p.require_zero(&["v", "gx", "gy"], "diagonal-hopping ribbon")?;
    check_cells(n)?;
    let band = band_from(p, axis, n, kt, false)?;
    let mut order: Vec<usize> = (0..band.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        band.eigenvalues[a]
            .norm()
            .total_cmp(&band.eigenvalues[b].norm())
            .then(a.cmp(&b))
    });
    let (i, j) = (order[0].min(order[1]), order[0].max(order[1]));
    if !(band.in_gap[i] && band.in_gap[j]) {
        return Ok(None);
    }
    let coalescence = coalescence_pair(band.eigenvectors.column(i), band.eigenvectors.column(j))?;
    Ok(Some(ZeroPair {
        indices: (i, j),
        eigenvalues: (band.eigenvalues[i], band.eigenvalues[j]),
        coalescence,
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkinReport {
    /// Mean IPR over bulk (not in-gap) states.
    pub mean_bulk_ipr: f64,
    pub bulk_count: usize,
    /// IPR of a uniform vector, 1/(2N).
    pub baseline: f64,
}

pub fn skin_metric(p: &ModelParams, axis: Axis, n: usize, kt: f64) -> Result<SkinReport> {
    check_cells(n)?;
    let band = band_from(p, axis, n, kt, false)?;
    let bulk: Vec<f64> = (0..band.eigenvalues.len())
        .filter(|&i| !band.in_gap[i])
        .map(|i| band.localization[i].ipr)
        .collect();
    let mean_bulk_ipr = if bulk.is_empty() {
        f64::NAN
    } else {
        bulk.iter().sum::<f64>() / bulk.len() as f64
    };
    Ok(SkinReport {
        mean_bulk_ipr,
        bulk_count: bulk.len(),
        baseline: 1.0 / (2 * n) as f64,
    })
}

/// Largest |Im ε| of a band, used for the Hermitian-limit check.
pub fn max_imaginary(band: &RibbonBand) -> f64 {
    band.eigenvalues
        .iter()
        .map(|e| e.im.abs())
        .fold(0.0, f64::max)
}

/// Sort check used by tests and the CLI: eigenvalues ascend by real part.
pub fn is_sorted(band: &RibbonBand) -> bool {
    band.eigenvalues
        .windows(2)
        .all(|w| cmp_re_im(&w[0], &w[1]) != std::cmp::Ordering::Greater)
}

/// ‖H v − λ v‖ for every stored state, relative to max(1, ‖H‖).
pub fn state_residuals(p: &ModelParams, axis: Axis, band: &RibbonBand) -> Result<Vec<f64>> {
    let n = band.eigenvalues.len() / 2;
    let h = ribbon_hamiltonian(p, axis, n, band.transverse_k)?;
    let scale = frobenius(&h).max(1.0);
    let hv = h.dot(&band.eigenvectors);
    Ok((0..2 * n)
        .map(|i| {
            let r = &hv.column(i) - &(band.eigenvectors.column(i).to_owned() * band.eigenvalues[i]);
            vec_norm(r.view()) / scale
        })
        .collect())
}
