//! Composite anti-unitary symmetries of the lattice model.
//!
//! An operator acts on real-space vectors as v ↦ A·conj(v) (or v ↦ A·v
//! without conjugation) with A = D_θ·U·P:
//! - P maps cell r to R·r + d, where R optionally mirrors y and d is a translation,
//! - U ∈ {𝟙, σx} acts on the two sublattices,
//! - D_θ multiplies the target cell r by e^{iθ·r}, with θ = site_phase·γ.
//!
//! The right relation is H(p)·A = A·conj(H(π_R p)) and the left relation is
//! A·conj(H(π_L p)) = H(p)†·A, where π_L = π_R composed with the sign flip of
//! every non-Hermitian parameter. With Bloch vectors Σ_r e^{−ik·r} u ⊗ |r⟩
//! the right relation becomes h_p(−Rk − θ)·U = U·conj(h_{π_R p}(k)); the left
//! relation has h_p(·)† in place of h_p(·). Translations drop out of both and
//! only enter the square of the operator pair.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{adjoint, conj, frobenius, mat2, ComplexMat};
use crate::error::{Error, Result};
use crate::model::{
    bloch_hamiltonian, real_space_hamiltonian, site_index, Boundary, ModelParams, Momentum,
};
use crate::Complex64;

/// Verdict threshold on residuals relative to max(1, ‖H‖).
pub const HOLDS_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    R,
    L,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unitary {
    Identity,
    SigmaX,
}

impl Unitary {
    pub fn matrix(self) -> ComplexMat {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        match self {
            Unitary::Identity => mat2(l, o, o, l),
            Unitary::SigmaX => mat2(o, l, l, o),
        }
    }
}

/// Involution on the non-Hermitian parameters: sign flips, then an optional ga ↔ gb swap.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamMap {
    pub flip_gx: bool,
    pub flip_gy: bool,
    pub flip_ga: bool,
    pub flip_gb: bool,
    pub flip_mu: bool,
    pub swap_ab: bool,
}

impl ParamMap {
    /// Sign flip of every non-Hermitian parameter: H(M p) = H(p)†.
    pub const ALL_FLIPS: ParamMap = ParamMap {
        flip_gx: true,
        flip_gy: true,
        flip_ga: true,
        flip_gb: true,
        flip_mu: true,
        swap_ab: false,
    };

    pub fn apply(&self, p: &ModelParams) -> ModelParams {
        let s = |flip: bool, x: f64| if flip { -x } else { x };
        let mut q = *p;
        q.gx = s(self.flip_gx, p.gx);
        q.gy = s(self.flip_gy, p.gy);
        q.ga = s(self.flip_ga, p.ga);
        q.gb = s(self.flip_gb, p.gb);
        q.mu_a = s(self.flip_mu, p.mu_a);
        q.mu_b = s(self.flip_mu, p.mu_b);
        if self.swap_ab {
            std::mem::swap(&mut q.ga, &mut q.gb);
        }
        q
    }

    /// A swap composed with unequal flips of ga and gb is not an involution.
    pub fn is_involution(&self) -> bool {
        !self.swap_ab || self.flip_ga == self.flip_gb
    }

    /// This map followed by the full sign flip.
    pub fn with_all_flips(&self) -> ParamMap {
        ParamMap {
            flip_gx: !self.flip_gx,
            flip_gy: !self.flip_gy,
            flip_ga: !self.flip_ga,
            flip_gb: !self.flip_gb,
            flip_mu: !self.flip_mu,
            swap_ab: self.swap_ab,
        }
    }
}

/// Declarative description of one side of a composite symmetry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositeSymmetrySpec {
    pub name: String,
    pub side: Side,
    pub unitary: Unitary,
    /// Mirror iy ↦ −iy before translating, so (kx, ky) ↦ (kx, −ky).
    pub mirror_y: bool,
    pub parameter_map: ParamMap,
    pub translation: (i32, i32),
    /// Site phase e^{iθ·r} with θ = site_phase·γ.
    pub site_phase: (f64, f64),
    pub conjugates: bool,
}

pub const BUILTIN_NAMES: [&str; 3] = ["upsilon", "upsilon_prime", "upsilon_doubleprime"];

/// The three operators of the model, right or left.
pub fn builtin_spec(name: &str, side: Side) -> Result<CompositeSymmetrySpec> {
    let (mirror_y, map, site_phase) = match name {
        "upsilon" => (
            false,
            ParamMap {
                flip_gx: true,
                flip_gy: true,
                ..Default::default()
            },
            (0.0, 0.0),
        ),
        "upsilon_prime" => (
            true,
            ParamMap {
                swap_ab: true,
                ..Default::default()
            },
            (0.0, 0.0),
        ),
        "upsilon_doubleprime" => (
            true,
            ParamMap {
                swap_ab: true,
                ..Default::default()
            },
            (-2.0, 2.0),
        ),
        other => return Err(Error::UnknownSymmetry(other.to_string())),
    };
    let parameter_map = match side {
        Side::R => map,
        Side::L => map.with_all_flips(),
    };
    Ok(CompositeSymmetrySpec {
        name: name.to_string(),
        side,
        unitary: Unitary::SigmaX,
        mirror_y,
        parameter_map,
        translation: (1, 0),
        site_phase,
        conjugates: true,
    })
}

impl CompositeSymmetrySpec {
    pub fn validate(&self) -> Result<()> {
        if !self.parameter_map.is_involution() {
            return Err(Error::Precondition(format!(
                "parameter map of {} is not an involution",
                self.name
            )));
        }
        Ok(())
    }

    /// Parameter maps of the right and left relations.
    pub fn maps(&self) -> (ParamMap, ParamMap) {
        match self.side {
            Side::R => (self.parameter_map, self.parameter_map.with_all_flips()),
            Side::L => (self.parameter_map.with_all_flips(), self.parameter_map),
        }
    }

    /// The partner spec on the other side.
    pub fn partner(&self) -> CompositeSymmetrySpec {
        let (r, l) = self.maps();
        let (side, parameter_map) = match self.side {
            Side::R => (Side::L, l),
            Side::L => (Side::R, r),
        };
        CompositeSymmetrySpec {
            side,
            parameter_map,
            ..self.clone()
        }
    }

    pub fn theta(&self, gamma: f64) -> (f64, f64) {
        (self.site_phase.0 * gamma, self.site_phase.1 * gamma)
    }

    fn reflect(&self, kx: f64, ky: f64) -> (f64, f64) {
        if self.mirror_y {
            (kx, -ky)
        } else {
            (kx, ky)
        }
    }

    /// Momentum at which h_p is evaluated when the relation is taken at k.
    pub fn momentum_map(&self, k: Momentum, gamma: f64) -> Momentum {
        let (tx, ty) = self.theta(gamma);
        let (rx, ry) = self.reflect(k.kx, k.ky);
        if self.conjugates {
            Momentum::new(-rx - tx, -ry - ty)
        } else {
            Momentum::new(rx - tx, ry - ty)
        }
    }
}

/// Residuals of the right and left relations at one momentum, unscaled.
pub fn bloch_residuals(p: &ModelParams, spec: &CompositeSymmetrySpec, k: Momentum) -> (f64, f64) {
    let (map_r, map_l) = spec.maps();
    let u = spec.unitary.matrix();
    let kp = spec.momentum_map(k, p.gamma);
    let hp = bloch_hamiltonian(p, kp);
    let side = |q: &ModelParams| {
        let hq = bloch_hamiltonian(q, k);
        if spec.conjugates {
            conj(&hq)
        } else {
            hq
        }
    };
    let right = frobenius(&(hp.dot(&u) - u.dot(&side(&map_r.apply(p)))));
    let left = frobenius(&(adjoint(&hp).dot(&u) - u.dot(&side(&map_l.apply(p)))));
    (right, left)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub spec: String,
    pub holds: bool,
    pub right_residual: f64,
    pub left_residual: f64,
    /// Momentum of the largest residual (Bloch check only).
    pub worst_k: Option<Momentum>,
    /// Smallest combined residual on the grid and where it occurs (Bloch check only).
    pub min_residual: Option<f64>,
    pub min_k: Option<Momentum>,
    /// Normalization applied to the residuals.
    pub scale: f64,
}

/// Evaluates both relations on an nx × ny momentum grid.
pub fn check_bloch(
    p: &ModelParams,
    spec: &CompositeSymmetrySpec,
    nx: usize,
    ny: usize,
) -> Result<SymmetryReport> {
    p.validate()?;
    spec.validate()?;
    if nx == 0 || ny == 0 {
        return Err(Error::Dimension("empty momentum grid".into()));
    }
    let samples: Vec<(Momentum, f64, f64, f64)> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % nx, idx / nx);
            let k = Momentum::new(
                -PI + 2.0 * PI * i as f64 / nx as f64,
                -PI + 2.0 * PI * j as f64 / ny as f64,
            );
            let (r, l) = bloch_residuals(p, spec, k);
            (k, r, l, frobenius(&bloch_hamiltonian(p, k)))
        })
        .collect();
    let scale = samples.iter().map(|s| s.3).fold(1.0, f64::max);
    let mut right: f64 = 0.0;
    let mut left: f64 = 0.0;
    let mut worst = (f64::NEG_INFINITY, samples[0].0);
    let mut best = (f64::INFINITY, samples[0].0);
    for &(k, r, l, _) in &samples {
        right = right.max(r);
        left = left.max(l);
        let m = r.max(l);
        if m > worst.0 {
            worst = (m, k);
        }
        if m < best.0 {
            best = (m, k);
        }
    }
    let (right, left) = (right / scale, left / scale);
    Ok(SymmetryReport {
        spec: spec.name.clone(),
        holds: right < HOLDS_TOL && left < HOLDS_TOL,
        right_residual: right,
        left_residual: left,
        worst_k: Some(worst.1),
        min_residual: Some(best.0 / scale),
        min_k: Some(best.1),
        scale,
    })
}

fn commensurate(phase: f64, n: usize) -> Result<()> {
    let turns = phase * n as f64 / (2.0 * PI);
    if (turns - turns.round()).abs() > 1e-9 {
        return Err(Error::Incommensurate { phase, length: n });
    }
    Ok(())
}

/// Dense matrix part A of the operator on an nx × ny torus.
pub fn realspace_operator(
    spec: &CompositeSymmetrySpec,
    gamma: f64,
    nx: usize,
    ny: usize,
) -> Result<ComplexMat> {
    let (tx, ty) = spec.theta(gamma);
    commensurate(tx, nx)?;
    commensurate(ty, ny)?;
    let u = spec.unitary.matrix();
    let n = 2 * nx * ny;
    let mut a = ComplexMat::zeros((n, n));
    let (dx, dy) = spec.translation;
    for ix in 0..nx {
        for iy in 0..ny {
            let my = if spec.mirror_y {
                -(iy as i64)
            } else {
                iy as i64
            };
            let jx = (ix as i64 + dx as i64).rem_euclid(nx as i64) as usize;
            let jy = (my + dy as i64).rem_euclid(ny as i64) as usize;
            let phase = Complex64::from_polar(1.0, tx * jx as f64 + ty * jy as f64);
            for s in 0..2 {
                for s2 in 0..2 {
                    if u[[s2, s]].norm() != 0.0 {
                        a[[
                            site_index(s2, jx, jy, nx, ny),
                            site_index(s, ix, iy, nx, ny),
                        ]] += u[[s2, s]] * phase;
                    }
                }
            }
        }
    }
    Ok(a)
}

/// Unscaled Frobenius residuals of both relations on the torus.
pub fn realspace_residuals(
    p: &ModelParams,
    spec: &CompositeSymmetrySpec,
    nx: usize,
    ny: usize,
) -> Result<(f64, f64, f64)> {
    p.validate()?;
    spec.validate()?;
    let a = realspace_operator(spec, p.gamma, nx, ny)?;
    let (map_r, map_l) = spec.maps();
    let torus = [Boundary::Periodic; 2];
    let h = real_space_hamiltonian(p, nx, ny, torus, None)?;
    let side = |q: &ModelParams| -> Result<ComplexMat> {
        let hq = real_space_hamiltonian(q, nx, ny, torus, None)?;
        Ok(if spec.conjugates { conj(&hq) } else { hq })
    };
    let right = frobenius(&(h.dot(&a) - a.dot(&side(&map_r.apply(p))?)));
    let left = frobenius(&(a.dot(&side(&map_l.apply(p))?) - adjoint(&h).dot(&a)));
    Ok((right, left, frobenius(&h)))
}

/// Brute-force check with explicit operator matrices on an nx × ny torus.
pub fn check_realspace(
    p: &ModelParams,
    spec: &CompositeSymmetrySpec,
    nx: usize,
    ny: usize,
) -> Result<SymmetryReport> {
    if nx < 2 || ny < 2 {
        return Err(Error::Dimension(format!(
            "torus {nx}x{ny} is smaller than 2x2"
        )));
    }
    let (right, left, hn) = realspace_residuals(p, spec, nx, ny)?;
    let scale = hn.max(1.0);
    let (right, left) = (right / scale, left / scale);
    Ok(SymmetryReport {
        spec: spec.name.clone(),
        holds: right < HOLDS_TOL && left < HOLDS_TOL,
        right_residual: right,
        left_residual: left,
        worst_k: None,
        min_residual: None,
        min_k: None,
        scale,
    })
}

/// √(Σ_k residual²) over the allowed momenta of the torus: equals the real-space residual.
pub fn torus_bloch_residuals(
    p: &ModelParams,
    spec: &CompositeSymmetrySpec,
    nx: usize,
    ny: usize,
) -> (f64, f64) {
    let (mut r2, mut l2) = (0.0, 0.0);
    for i in 0..nx {
        for j in 0..ny {
            let k = Momentum::new(
                2.0 * PI * i as f64 / nx as f64,
                2.0 * PI * j as f64 / ny as f64,
            );
            let (r, l) = bloch_residuals(p, spec, k);
            r2 += r * r;
            l2 += l * l;
        }
    }
    (r2.sqrt(), l2.sqrt())
}

fn reflect_vec(mirror: bool, v: (f64, f64)) -> (f64, f64) {
    if mirror {
        (v.0, -v.1)
    } else {
        v
    }
}

/// Bloch eigenvalue at k of the product Υ_R·Υ_L when that product is a pure translation.
///
/// With A_i = D_{θ_i} U_i P_i the product A_1·conj(A_2) equals
/// e^{−i(R_1θ_2′)·d_1}·D_{θ_1 + R_1θ_2′}·U_1 conj(U_2)·P_1 P_2 with θ_2′ = −θ_2
/// (θ_2′ = θ_2 without conjugation). It is a pure translation when the total
/// site phase vanishes mod 2π, U_1 conj(U_2) = c·𝟙 and R_1 R_2 = 𝟙; the
/// translation by d acts on Bloch states as e^{ik·d}.
pub fn pair_product_phase(
    spec_r: &CompositeSymmetrySpec,
    spec_l: &CompositeSymmetrySpec,
    k: Momentum,
    gamma: f64,
) -> Result<Complex64> {
    if spec_r.name != spec_l.name || spec_r.side == spec_l.side {
        return Err(Error::NotPureTranslation(format!(
            "{} ({:?}) and {} ({:?}) are not a right/left pair",
            spec_r.name, spec_r.side, spec_l.name, spec_l.side
        )));
    }
    if spec_r.mirror_y != spec_l.mirror_y {
        return Err(Error::NotPureTranslation(
            "mirror parts do not cancel".into(),
        ));
    }
    let u1 = spec_r.unitary.matrix();
    let u2 = spec_l.unitary.matrix();
    let u2 = if spec_r.conjugates { conj(&u2) } else { u2 };
    let uu = u1.dot(&u2);
    let c = uu[[0, 0]];
    let off = uu[[0, 1]].norm() + uu[[1, 0]].norm() + (uu[[1, 1]] - c).norm();
    if off > 1e-14 {
        return Err(Error::NotPureTranslation(
            "unitary parts do not multiply to a scalar".into(),
        ));
    }
    let th1 = spec_r.theta(gamma);
    let th2 = spec_l.theta(gamma);
    let th2p = if spec_r.conjugates {
        (-th2.0, -th2.1)
    } else {
        th2
    };
    let rth2 = reflect_vec(spec_r.mirror_y, th2p);
    let total = (th1.0 + rth2.0, th1.1 + rth2.1);
    for t in [total.0, total.1] {
        let turns = t / (2.0 * PI);
        if (turns - turns.round()).abs() > 1e-12 {
            return Err(Error::NotPureTranslation(format!(
                "residual site phase {t} is not a multiple of 2π"
            )));
        }
    }
    let d1 = (spec_r.translation.0 as f64, spec_r.translation.1 as f64);
    let d2 = reflect_vec(
        spec_r.mirror_y,
        (spec_l.translation.0 as f64, spec_l.translation.1 as f64),
    );
    let phi0 = -(rth2.0 * d1.0 + rth2.1 * d1.1);
    let d = (d1.0 + d2.0, d1.1 + d2.1);
    Ok(c * Complex64::from_polar(1.0, phi0 + k.kx * d.0 + k.ky * d.1))
}

/// Bloch checks of all three built-in operators.
pub fn symmetry_survey(p: &ModelParams, nx: usize, ny: usize) -> Result<Vec<SymmetryReport>> {
    BUILTIN_NAMES
        .iter()
        .map(|name| check_bloch(p, &builtin_spec(name, Side::R)?, nx, ny))
        .collect()
}
