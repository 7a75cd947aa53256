//! Brillouin-zone scans: discriminant fields, Newton-refined degeneracy
//! points with defective/non-defective classification, zero curves and
//! Fermi curves, and the vector-field CSV export.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{coalescence, frobenius, identity};
use crate::contour::Contour;
use crate::error::{Error, Result};
use crate::io::{parse_csv_header, FORMAT};
use crate::model::{bloch_hamiltonian, d_vector, dispersion, eta, ModelParams, Momentum};
use crate::{Complex64, TOOLKIT_VERSION};

/// Smallest grid accepted by [`scan_discriminant`].
pub const MIN_GRID: usize = 16;
/// Default grid for [`find_degeneracies`].
pub const DEFAULT_GRID: usize = 501;
/// Finite-difference step of the Newton Jacobian.
pub const FD_STEP: f64 = 1e-6;
/// Newton iteration cap.
pub const MAX_NEWTON: usize = 50;
/// Radius within which refined points are merged.
pub const DEDUP_RADIUS: f64 = 1e-4;
/// Seeds are also taken from |η| local minima below this value (at the default grid).
pub const SEED_THRESHOLD: f64 = 1e-2;
/// ‖h − λ₀𝟙‖ ≤ ND_TOL·max(1, ‖h‖) classifies a point as non-defective.
pub const ND_TOL: f64 = 1e-8;
/// Largest move accepted when polishing a point onto a non-defective degeneracy.
pub const POLISH_RADIUS: f64 = 1e-4;
/// Coalescence overlap ≥ 1 − DEFECTIVE_OVERLAP_TOL classifies a point as defective.
pub const DEFECTIVE_OVERLAP_TOL: f64 = 1e-6;

/// Complex field sampled on the uniform grid k = −π + 2π·(i/nx, j/ny).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub nx: usize,
    pub ny: usize,
    pub params: Option<ModelParams>,
    /// Row-major with ky outer: index = j·nx + i.
    pub values: Vec<Complex64>,
}

/// Grid momentum of node i (of n) on one axis.
pub fn grid_coordinate(i: usize, n: usize) -> f64 {
    -PI + 2.0 * PI * i as f64 / n as f64
}

impl ScalarField {
    pub fn from_fn(nx: usize, ny: usize, f: impl Fn(Momentum) -> Complex64 + Sync) -> Self {
        let values = (0..ny)
            .into_par_iter()
            .flat_map_iter(|j| {
                let f = &f;
                (0..nx).map(move |i| {
                    f(Momentum::new(
                        grid_coordinate(i, nx),
                        grid_coordinate(j, ny),
                    ))
                })
            })
            .collect();
        ScalarField {
            nx,
            ny,
            params: None,
            values,
        }
    }

    pub fn k_at(&self, i: usize, j: usize) -> Momentum {
        Momentum::new(grid_coordinate(i, self.nx), grid_coordinate(j, self.ny))
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[(j % self.ny) * self.nx + i % self.nx]
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn im(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.im).collect()
    }

    /// Converts fractional grid coordinates to a momentum.
    pub fn grid_to_k(&self, x: f64, y: f64) -> Momentum {
        Momentum::new(
            -PI + 2.0 * PI * x / self.nx as f64,
            -PI + 2.0 * PI * y / self.ny as f64,
        )
    }
}

/// η(k) on an nx × ny grid.
pub fn scan_discriminant(p: &ModelParams, nx: usize, ny: usize) -> Result<ScalarField> {
    p.validate()?;
    if nx < MIN_GRID || ny < MIN_GRID {
        return Err(Error::Precondition(format!(
            "grid {nx}x{ny} is below the minimum {MIN_GRID}x{MIN_GRID}"
        )));
    }
    let mut field = ScalarField::from_fn(nx, ny, |k| eta(p, k));
    field.params = Some(*p);
    Ok(field)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegeneracyKind {
    Defective,
    Nondefective,
    Unresolved,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyPoint {
    pub k: Momentum,
    pub lambda0: Complex64,
    pub kind: DegeneracyKind,
    /// |η(k)| at the refined momentum.
    pub eta_residual: f64,
    pub coalescence_overlap: f64,
    /// ‖h − λ₀𝟙‖_F / max(1, ‖h‖_F).
    pub scalar_residual: f64,
    /// |ε₊ − ε₋|.
    pub splitting: f64,
    pub newton_iters: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub nx: usize,
    pub ny: usize,
    /// Refinement tolerance on |η|.
    pub tol: f64,
    /// Merge points related by the reduced-zone vector (π, π).
    pub fold: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            nx: DEFAULT_GRID,
            ny: DEFAULT_GRID,
            tol: 1e-10,
            fold: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub options: ScanOptions,
    pub seeds: usize,
    /// Seeds whose Newton refinement did not reach the tolerance.
    pub dropped: usize,
    pub points: Vec<DegeneracyPoint>,
}

impl ScanReport {
    pub fn of_kind(&self, kind: DegeneracyKind) -> Vec<&DegeneracyPoint> {
        self.points.iter().filter(|p| p.kind == kind).collect()
    }

    pub fn unresolved(&self) -> usize {
        self.of_kind(DegeneracyKind::Unresolved).len()
    }
}

fn seeds(field: &ScalarField) -> Vec<(f64, f64)> {
    let (nx, ny) = (field.nx, field.ny);
    let h = (2.0 * PI / nx as f64, 2.0 * PI / ny as f64);
    // Near an even-order zero |η| grows quadratically, so coarser grids need
    // a proportionally larger threshold to see the minimum.
    let coarse = (DEFAULT_GRID as f64 / nx.min(ny) as f64).max(1.0);
    let threshold = SEED_THRESHOLD * coarse * coarse;
    let mut out = Vec::new();
    let sign_change = |vals: [f64; 4]| {
        let pos = vals.iter().filter(|v| **v > 0.0).count();
        pos > 0 && pos < 4
    };
    for j in 0..ny {
        for i in 0..nx {
            let c = [
                field.at(i, j),
                field.at(i + 1, j),
                field.at(i + 1, j + 1),
                field.at(i, j + 1),
            ];
            if sign_change(c.map(|z| z.re)) && sign_change(c.map(|z| z.im)) {
                let k = field.k_at(i, j);
                out.push((k.kx + 0.5 * h.0, k.ky + 0.5 * h.1));
            }
            let m = field.at(i, j).norm();
            if m < threshold {
                let is_min = (-1i64..=1).all(|dj| {
                    (-1i64..=1).all(|di| {
                        let ii = (i as i64 + di).rem_euclid(nx as i64) as usize;
                        let jj = (j as i64 + dj).rem_euclid(ny as i64) as usize;
                        (di == 0 && dj == 0) || field.at(ii, jj).norm() >= m
                    })
                });
                if is_min {
                    let k = field.k_at(i, j);
                    out.push((k.kx, k.ky));
                }
            }
        }
    }
    out
}

fn eta_at(p: &ModelParams, kx: f64, ky: f64) -> Complex64 {
    eta(p, Momentum::new(kx, ky))
}

/// 2D Newton on (Re η, Im η) with a central-difference Jacobian.
///
/// Each step also tries the doubled step, which restores fast convergence
/// at the even-order zeros of non-defective points.
fn newton(p: &ModelParams, start: (f64, f64), tol: f64) -> Option<(Momentum, usize)> {
    let (mut kx, mut ky) = start;
    let mut f = eta_at(p, kx, ky);
    let mut iters = 0;
    while iters < MAX_NEWTON {
        if f.norm() == 0.0 {
            break;
        }
        iters += 1;
        let fxp = eta_at(p, kx + FD_STEP, ky);
        let fxm = eta_at(p, kx - FD_STEP, ky);
        let fyp = eta_at(p, kx, ky + FD_STEP);
        let fym = eta_at(p, kx, ky - FD_STEP);
        let jx = (fxp - fxm) / (2.0 * FD_STEP);
        let jy = (fyp - fym) / (2.0 * FD_STEP);
        // [[Re jx, Re jy], [Im jx, Im jy]] · δ = −(Re f, Im f)
        let det = jx.re * jy.im - jy.re * jx.im;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = -(jy.im * f.re - jy.re * f.im) / det;
        let dy = -(-jx.im * f.re + jx.re * f.im) / det;
        let f1 = eta_at(p, kx + dx, ky + dy);
        let f2 = eta_at(p, kx + 2.0 * dx, ky + 2.0 * dy);
        let (sx, sy, fn_) = if f2.norm() < f1.norm() {
            (2.0 * dx, 2.0 * dy, f2)
        } else {
            (dx, dy, f1)
        };
        if fn_.norm() > f.norm() && f.norm() <= tol {
            break;
        }
        kx += sx;
        ky += sy;
        f = fn_;
        if sx.hypot(sy) < 1e-15 * (1.0 + kx.hypot(ky)) {
            break;
        }
    }
    (f.norm() <= tol && kx.is_finite() && ky.is_finite()).then(|| (Momentum::new(kx, ky), iters))
}

/// Traceless part (dx, dy, dz) of h(k) as six real residuals.
fn traceless(p: &ModelParams, kx: f64, ky: f64) -> [f64; 6] {
    let d = d_vector(p, Momentum::new(kx, ky));
    [d.dx.re, d.dx.im, d.dy.re, d.dy.im, d.dz.re, d.dz.im]
}

/// Gauss–Newton on the traceless part of h(k), started from a point where η ≈ 0.
///
/// Non-defective points are regular zeros of (dx, dy, dz), whereas η itself
/// can vanish along whole curves through them; polishing on the traceless
/// part pins the point down to rounding level. Returns `None` unless the
/// traceless part reaches the non-defective tolerance within `radius` of
/// the start, so defective points are left alone.
fn polish_nondefective(p: &ModelParams, k: Momentum, radius: f64) -> Option<(Momentum, usize)> {
    let (mut kx, mut ky) = (k.kx, k.ky);
    let norm = |r: &[f64; 6]| r.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut r = traceless(p, kx, ky);
    let mut iters = 0;
    while iters < MAX_NEWTON && norm(&r) > 0.0 {
        iters += 1;
        let (rxp, rxm) = (
            traceless(p, kx + FD_STEP, ky),
            traceless(p, kx - FD_STEP, ky),
        );
        let (ryp, rym) = (
            traceless(p, kx, ky + FD_STEP),
            traceless(p, kx, ky - FD_STEP),
        );
        let jx: Vec<f64> = (0..6)
            .map(|i| (rxp[i] - rxm[i]) / (2.0 * FD_STEP))
            .collect();
        let jy: Vec<f64> = (0..6)
            .map(|i| (ryp[i] - rym[i]) / (2.0 * FD_STEP))
            .collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let (a, b, c) = (dot(&jx, &jx), dot(&jx, &jy), dot(&jy, &jy));
        let (gx, gy) = (dot(&jx, &r), dot(&jy, &r));
        let det = a * c - b * b;
        if !(det.abs() > 0.0) {
            break;
        }
        let sx = -(c * gx - b * gy) / det;
        let sy = -(a * gy - b * gx) / det;
        let r1 = traceless(p, kx + sx, ky + sy);
        if norm(&r1) >= norm(&r) {
            break;
        }
        kx += sx;
        ky += sy;
        r = r1;
        if sx.hypot(sy) < 1e-15 * (1.0 + kx.hypot(ky)) {
            break;
        }
    }
    let polished = Momentum::new(kx, ky);
    let h = bloch_hamiltonian(p, polished);
    let residual = frobenius(&(&h - &identity(2).mapv(|z| z * d_vector(p, polished).d0)));
    let stays = polished.distance(&k) <= radius;
    (stays && residual <= ND_TOL * frobenius(&h).max(1.0)).then_some((polished, iters))
}

/// Classifies a refined degeneracy of the Bloch matrix at `k`.
pub fn classify(p: &ModelParams, k: Momentum, newton_iters: usize) -> DegeneracyPoint {
    let h = bloch_hamiltonian(p, k);
    let lambda0 = (h[[0, 0]] + h[[1, 1]]) * 0.5;
    let scale = frobenius(&h).max(1.0);
    let scalar_residual = frobenius(&(&h - &identity(2).mapv(|z| z * lambda0))) / scale;
    let overlap = coalescence(&h).map(|c| c.overlap).unwrap_or(0.0);
    let kind = if scalar_residual <= ND_TOL {
        DegeneracyKind::Nondefective
    } else if overlap >= 1.0 - DEFECTIVE_OVERLAP_TOL {
        DegeneracyKind::Defective
    } else {
        DegeneracyKind::Unresolved
    };
    let (ep, em) = dispersion(p, k);
    DegeneracyPoint {
        k,
        lambda0,
        kind,
        eta_residual: eta(p, k).norm(),
        coalescence_overlap: overlap,
        scalar_residual,
        splitting: (ep - em).norm(),
        newton_iters,
    }
}

fn reduced_zone_partner(k: &Momentum) -> Momentum {
    k.shifted(PI, PI)
}

/// Locates, refines, deduplicates and classifies all degeneracies of h(k).
pub fn find_degeneracies(p: &ModelParams, opts: &ScanOptions) -> Result<ScanReport> {
    if !(opts.tol > 0.0) {
        return Err(Error::Precondition(format!(
            "tol must be positive, got {}",
            opts.tol
        )));
    }
    let field = scan_discriminant(p, opts.nx, opts.ny)?;
    let starts = seeds(&field);
    // Newton on η can stall or wander at a non-defective point, where its
    // Jacobian is singular along whole lines; the traceless part has a regular
    // zero there. Every seed therefore gets both refinements.
    let seed_radius = 2.0 * (2.0 * PI / opts.nx.min(opts.ny) as f64) * std::f64::consts::SQRT_2;
    let refined: Vec<Vec<(Momentum, usize)>> = starts
        .par_iter()
        .map(|&s| {
            let direct = polish_nondefective(p, Momentum::new(s.0, s.1), seed_radius)
                .filter(|(k, _)| eta(p, *k).norm() <= opts.tol);
            let newton = newton(p, s, opts.tol).map(|(k, it)| {
                match polish_nondefective(p, k, POLISH_RADIUS) {
                    Some((kp, extra)) if eta(p, kp).norm() <= opts.tol => (kp, it + extra),
                    _ => (k, it),
                }
            });
            direct.into_iter().chain(newton).collect()
        })
        .collect();
    let dropped = refined.iter().filter(|r| r.is_empty()).count();
    let mut found: Vec<(Momentum, usize)> = refined.into_iter().flatten().collect();
    found.sort_by(|a, b| {
        eta(p, a.0)
            .norm()
            .total_cmp(&eta(p, b.0).norm())
            .then(a.0.kx.total_cmp(&b.0.kx))
            .then(a.0.ky.total_cmp(&b.0.ky))
    });
    let mut kept: Vec<(Momentum, usize)> = Vec::new();
    for (k, it) in found {
        let dup = kept.iter().any(|(q, _)| {
            q.distance(&k) < DEDUP_RADIUS
                || (opts.fold && q.distance(&reduced_zone_partner(&k)) < DEDUP_RADIUS)
        });
        if !dup {
            kept.push((k, it));
        }
    }
    let mut points: Vec<DegeneracyPoint> =
        kept.into_iter().map(|(k, it)| classify(p, k, it)).collect();
    // Quantized keys keep the order stable against rounding-level differences.
    let key = |x: f64| (x * 1e8).round() as i64;
    points.sort_by_key(|q| (key(q.k.kx), key(q.k.ky)));
    Ok(ScanReport {
        options: *opts,
        seeds: starts.len(),
        dropped,
        points,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    ReEta,
    ImEta,
    ReEnergy,
    ImEnergy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Band {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Re,
    Im,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroCurve {
    pub which: CurveKind,
    pub polylines: Vec<Vec<Momentum>>,
    /// The field vanishes on the whole grid; no polylines are reported.
    pub whole_grid_zero: bool,
    /// Isolated zeros where the field touches zero without changing sign.
    pub touch_points: Vec<Momentum>,
}

impl ZeroCurve {
    pub fn vertex_count(&self) -> usize {
        self.polylines.iter().map(Vec::len).sum()
    }
}

fn to_polylines(field: &ScalarField, values: &[f64], ztol: f64) -> Vec<Vec<Momentum>> {
    Contour::new(values, field.nx, field.ny, ztol)
        .polylines()
        .into_iter()
        .map(|l| {
            l.points
                .iter()
                .map(|&(x, y)| field.grid_to_k(x, y))
                .collect()
        })
        .collect()
}

/// Zero-level curves of Re η or Im η.
pub fn zero_curves(field: &ScalarField, which: Part) -> ZeroCurve {
    let values = match which {
        Part::Re => field.re(),
        Part::Im => field.im(),
    };
    let whole = values.iter().all(|v| *v == 0.0);
    ZeroCurve {
        which: match which {
            Part::Re => CurveKind::ReEta,
            Part::Im => CurveKind::ImEta,
        },
        polylines: if whole {
            Vec::new()
        } else {
            to_polylines(field, &values, 0.0)
        },
        whole_grid_zero: whole,
        touch_points: Vec::new(),
    }
}

/// Nodes with |f| below this count as zero in Fermi-curve extraction.
pub const FERMI_ZTOL: f64 = 1e-10;
/// Touch points are reported when pattern search drives |f| below this.
pub const TOUCH_TOL: f64 = 1e-6;

fn band_value(p: &ModelParams, k: Momentum, part: Part, band: Band) -> f64 {
    let (ep, em) = dispersion(p, k);
    let e = match band {
        Band::Plus => ep,
        Band::Minus => em,
    };
    match part {
        Part::Re => e.re,
        Part::Im => e.im,
    }
}

fn pattern_search(f: impl Fn(f64, f64) -> f64, start: (f64, f64), step: f64) -> ((f64, f64), f64) {
    let (mut x, mut y) = start;
    let mut best = f(x, y);
    let mut h = step;
    while h > 1e-12 {
        let mut moved = false;
        for (dx, dy) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let v = f(x + dx, y + dy);
            if v < best {
                best = v;
                x += dx;
                y += dy;
                moved = true;
                break;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    ((x, y), best)
}

/// r-Fermi (`Part::Re`) or i-Fermi (`Part::Im`) curves of one band.
///
/// The principal square root makes the band field jump across branch cuts;
/// interpolated vertices whose model value is not small compared with the
/// edge samples are discarded, which removes those spurious crossings.
pub fn fermi_curves(
    p: &ModelParams,
    nx: usize,
    ny: usize,
    part: Part,
    band: Band,
) -> Result<ZeroCurve> {
    p.validate()?;
    if nx < MIN_GRID || ny < MIN_GRID {
        return Err(Error::Precondition(format!(
            "grid {nx}x{ny} is below the minimum {MIN_GRID}x{MIN_GRID}"
        )));
    }
    let which = match part {
        Part::Re => CurveKind::ReEnergy,
        Part::Im => CurveKind::ImEnergy,
    };
    let field = ScalarField::from_fn(nx, ny, |k| {
        Complex64::new(band_value(p, k, part, band), 0.0)
    });
    let values = field.re();
    if values.iter().all(|v| v.abs() <= FERMI_ZTOL) {
        return Ok(ZeroCurve {
            which,
            polylines: Vec::new(),
            whole_grid_zero: true,
            touch_points: Vec::new(),
        });
    }
    let h = 2.0 * PI / nx.max(ny) as f64;
    let accept = |k: &Momentum| {
        let v = band_value(p, *k, part, band).abs();
        // Largest sample magnitude within one cell of the vertex.
        let i = ((k.kx + PI) / (2.0 * PI) * nx as f64).floor() as usize;
        let j = ((k.ky + PI) / (2.0 * PI) * ny as f64).floor() as usize;
        let local = [(0, 0), (1, 0), (0, 1), (1, 1)]
            .iter()
            .map(|&(a, b)| values[((j + b) % ny) * nx + (i + a) % nx].abs())
            .fold(0.0, f64::max);
        v <= FERMI_ZTOL || v <= 0.25 * local
    };
    let mut polylines = Vec::new();
    let mut touch_points: Vec<Momentum> = Vec::new();
    for line in to_polylines(&field, &values, FERMI_ZTOL) {
        // A loop around an isolated zero node collapses onto the node.
        if line.iter().all(|k| k.distance(&line[0]) < 1e-9) {
            touch_points.push(line[0]);
            continue;
        }
        let mut run: Vec<Momentum> = Vec::new();
        for k in line {
            if accept(&k) {
                run.push(k);
            } else if !run.is_empty() {
                if run.len() >= 2 {
                    polylines.push(std::mem::take(&mut run));
                } else {
                    run.clear();
                }
            }
        }
        if run.len() >= 2 {
            polylines.push(run);
        }
    }
    // Touch points: strict local minima of |f| that pattern search drives to zero.
    for j in 0..ny {
        for i in 0..nx {
            let m = values[j * nx + i].abs();
            if m <= FERMI_ZTOL {
                continue;
            }
            let is_min = [
                (-1i64, 0i64),
                (1, 0),
                (0, -1),
                (0, 1),
                (-1, -1),
                (1, 1),
                (-1, 1),
                (1, -1),
            ]
            .iter()
            .all(|&(di, dj)| {
                let ii = (i as i64 + di).rem_euclid(nx as i64) as usize;
                let jj = (j as i64 + dj).rem_euclid(ny as i64) as usize;
                values[jj * nx + ii].abs() > m
            });
            if !is_min {
                continue;
            }
            let k0 = field.k_at(i, j);
            let ((x, y), best) = pattern_search(
                |x, y| band_value(p, Momentum::new(x, y), part, band).abs(),
                (k0.kx, k0.ky),
                h,
            );
            if best <= TOUCH_TOL {
                let k = Momentum::new(x, y);
                if touch_points.iter().all(|q| q.distance(&k) > 2.0 * h) {
                    touch_points.push(k);
                }
            }
        }
    }
    touch_points.sort_by(|a, b| a.kx.total_cmp(&b.kx).then(a.ky.total_cmp(&b.ky)));
    Ok(ZeroCurve {
        which,
        polylines,
        whole_grid_zero: false,
        touch_points,
    })
}

fn unwrap_near(a: f64, reference: f64) -> f64 {
    reference + crate::model::wrap_angle(a - reference)
}

/// Crossing points of two zero curves (segment–segment intersections).
pub fn curve_intersections(a: &ZeroCurve, b: &ZeroCurve) -> Vec<Momentum> {
    let segs = |c: &ZeroCurve| -> Vec<(Momentum, Momentum)> {
        c.polylines
            .iter()
            .flat_map(|l| l.windows(2).map(|w| (w[0], w[1])))
            .collect()
    };
    let (sa, sb) = (segs(a), segs(b));
    let mut out = Vec::new();
    for &(p0, p1) in &sa {
        let (x0, y0) = (p0.kx, p0.ky);
        let (x1, y1) = (unwrap_near(p1.kx, x0), unwrap_near(p1.ky, y0));
        for &(q0, q1) in &sb {
            let (u0, v0) = (unwrap_near(q0.kx, x0), unwrap_near(q0.ky, y0));
            let (u1, v1) = (unwrap_near(q1.kx, u0), unwrap_near(q1.ky, v0));
            let (rx, ry) = (x1 - x0, y1 - y0);
            let (sx, sy) = (u1 - u0, v1 - v0);
            let den = rx * sy - ry * sx;
            if den.abs() < 1e-300 {
                continue;
            }
            let t = ((u0 - x0) * sy - (v0 - y0) * sx) / den;
            let s = ((u0 - x0) * ry - (v0 - y0) * rx) / den;
            if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&s) {
                out.push(Momentum::new(x0 + t * rx, y0 + t * ry));
            }
        }
    }
    out
}

/// CSV rows `kx,ky,re_eta,im_eta` under a `# {json}` provenance line.
///
/// Floats are written with Rust's shortest round-trip formatting, so
/// [`import_vector_field`] reproduces every sample bit for bit.
pub fn export_vector_field(field: &ScalarField) -> String {
    let header = serde_json::json!({
        "format": FORMAT,
        "params": field.params,
        "toolkit_version": TOOLKIT_VERSION,
        "nx": field.nx,
        "ny": field.ny,
    });
    let mut out = format!("# {header}\nkx,ky,re_eta,im_eta\n");
    for j in 0..field.ny {
        for i in 0..field.nx {
            let k = field.k_at(i, j);
            let v = field.at(i, j);
            out.push_str(&format!("{},{},{},{}\n", k.kx, k.ky, v.re, v.im));
        }
    }
    out
}

pub fn import_vector_field(text: &str) -> Result<ScalarField> {
    let mut lines = text.lines();
    let header: Value = parse_csv_header(lines.next().unwrap_or(""))?;
    let dim = |key: &str| {
        header
            .get(key)
            .and_then(Value::as_u64)
            .map(|v| v as usize)
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("header lacks {key}"),
            })
    };
    let (nx, ny) = (dim("nx")?, dim("ny")?);
    let params: Option<ModelParams> = match header.get("params") {
        Some(Value::Null) | None => None,
        Some(v) => Some(serde_json::from_value(v.clone()).map_err(|e| Error::Parse {
            line: 1,
            message: format!("bad params: {e}"),
        })?),
    };
    if lines.next() != Some("kx,ky,re_eta,im_eta") {
        return Err(Error::Parse {
            line: 2,
            message: "expected column header kx,ky,re_eta,im_eta".into(),
        });
    }
    let mut values = Vec::with_capacity(nx * ny);
    for (no, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        let bad = |m: &str| Error::Parse {
            line: no + 3,
            message: m.to_string(),
        };
        if cols.len() != 4 {
            return Err(bad("expected four columns"));
        }
        let re: f64 = cols[2].parse().map_err(|_| bad("re_eta is not a number"))?;
        let im: f64 = cols[3].parse().map_err(|_| bad("im_eta is not a number"))?;
        values.push(Complex64::new(re, im));
    }
    if values.len() != nx * ny {
        return Err(Error::Parse {
            line: values.len() + 2,
            message: format!("expected {} rows, found {}", nx * ny, values.len()),
        });
    }
    Ok(ScalarField {
        nx,
        ny,
        params,
        values,
    })
}
