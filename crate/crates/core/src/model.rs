//! Two-band bipartite square-lattice model: Bloch matrix, d-vector,
//! dispersions, real-space and ribbon Hamiltonians, phase boundaries and
//! low-order expansions about high-symmetry points.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::algebra::{cx, discriminant_unchecked, mat2, ComplexMat};
use crate::error::{Error, Result};
use crate::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance for "this parameter is zero" regime checks.
pub const REGIME_TOL: f64 = 1e-12;

/// Full parameter tuple. Energies are in units of `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub t: f64,
    pub t1: f64,
    pub v: f64,
    pub gamma: f64,
    pub gx: f64,
    pub gy: f64,
    pub ga: f64,
    pub gb: f64,
    #[serde(default)]
    pub mu_a: f64,
    #[serde(default)]
    pub mu_b: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            t: 1.0,
            t1: 0.0,
            v: 0.0,
            gamma: 0.0,
            gx: 0.0,
            gy: 0.0,
            ga: 0.0,
            gb: 0.0,
            mu_a: 0.0,
            mu_b: 0.0,
        }
    }
}

impl ModelParams {
    /// Parameter-file keys in canonical order.
    pub const KEYS: [&'static str; 10] = [
        "t", "t1", "v", "gamma", "gx", "gy", "ga", "gb", "mu_a", "mu_b",
    ];

    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "t" => self.t,
            "t1" => self.t1,
            "v" => self.v,
            "gamma" => self.gamma,
            "gx" => self.gx,
            "gy" => self.gy,
            "ga" => self.ga,
            "gb" => self.gb,
            "mu_a" => self.mu_a,
            "mu_b" => self.mu_b,
            _ => return None,
        })
    }

    pub fn set(&mut self, key: &str, value: f64) -> Option<()> {
        let slot = match key {
            "t" => &mut self.t,
            "t1" => &mut self.t1,
            "v" => &mut self.v,
            "gamma" => &mut self.gamma,
            "gx" => &mut self.gx,
            "gy" => &mut self.gy,
            "ga" => &mut self.ga,
            "gb" => &mut self.gb,
            "mu_a" => &mut self.mu_a,
            "mu_b" => &mut self.mu_b,
            _ => return None,
        };
        *slot = value;
        Some(())
    }

    pub fn validate(&self) -> Result<()> {
        for key in Self::KEYS {
            let value = self.get(key).expect("known key");
            if !value.is_finite() {
                return Err(Error::Precondition(format!(
                    "parameter {key} is not finite"
                )));
            }
        }
        if self.t <= 0.0 {
            return Err(Error::Precondition(format!(
                "t must be positive, got {}",
                self.t
            )));
        }
        Ok(())
    }

    /// True when every nonreciprocity and onsite gain/loss term vanishes.
    pub fn is_hermitian(&self) -> bool {
        [self.gx, self.gy, self.ga, self.gb, self.mu_a, self.mu_b]
            .iter()
            .all(|g| g.abs() <= REGIME_TOL)
    }

    pub(crate) fn require_zero(&self, keys: &[&'static str], regime: &'static str) -> Result<()> {
        for &name in keys {
            let value = self.get(name).expect("known key");
            if value.abs() > REGIME_TOL {
                return Err(Error::Regime {
                    name,
                    value,
                    regime,
                });
            }
        }
        Ok(())
    }
}

/// Crystal momentum on the square torus, canonicalized to [−π, π)².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Momentum {
    pub kx: f64,
    pub ky: f64,
}

/// Maps an angle into [−π, π).
pub fn wrap_angle(x: f64) -> f64 {
    let y = x - 2.0 * PI * ((x + PI) / (2.0 * PI)).floor();
    if y >= PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

impl Momentum {
    pub fn new(kx: f64, ky: f64) -> Self {
        Momentum {
            kx: wrap_angle(kx),
            ky: wrap_angle(ky),
        }
    }

    pub fn gamma() -> Self {
        Momentum::new(0.0, 0.0)
    }

    /// X₁ = (π/2, π/2).
    pub fn x1() -> Self {
        Momentum::new(FRAC_PI_2, FRAC_PI_2)
    }

    /// X₂ = (π/2, −π/2).
    pub fn x2() -> Self {
        Momentum::new(FRAC_PI_2, -FRAC_PI_2)
    }

    /// M = (π, 0), stored as (−π, 0).
    pub fn m() -> Self {
        Momentum::new(PI, 0.0)
    }

    /// Torus distance to another momentum.
    pub fn distance(&self, other: &Momentum) -> f64 {
        angle_distance(self.kx, other.kx).hypot(angle_distance(self.ky, other.ky))
    }

    pub fn shifted(&self, px: f64, py: f64) -> Self {
        Momentum::new(self.kx + px, self.ky + py)
    }
}

/// Pauli decomposition h = d0·𝟙 + dx·σx + dy·σy + dz·σz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DVector {
    pub d0: Complex64,
    pub dx: Complex64,
    pub dy: Complex64,
    pub dz: Complex64,
}

impl DVector {
    pub fn from_entries(h11: Complex64, h12: Complex64, h21: Complex64, h22: Complex64) -> Self {
        DVector {
            d0: (h11 + h22) * 0.5,
            dz: (h11 - h22) * 0.5,
            dx: (h12 + h21) * 0.5,
            dy: I * (h12 - h21) * 0.5,
        }
    }

    pub fn to_matrix(&self) -> ComplexMat {
        mat2(
            self.d0 + self.dz,
            self.dx - I * self.dy,
            self.dx + I * self.dy,
            self.d0 - self.dz,
        )
    }

    /// Discriminant 4(dx² + dy² + dz²).
    pub fn eta(&self) -> Complex64 {
        (self.dx * self.dx + self.dy * self.dy + self.dz * self.dz) * 4.0
    }
}

/// Boundary condition along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
}

/// Lattice axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            other => Err(Error::Precondition(format!("unknown axis {other:?}"))),
        }
    }
}

/// Entries (h11, h12, h21, h22) of the Bloch matrix.
pub fn bloch_entries(p: &ModelParams, k: Momentum) -> [Complex64; 4] {
    let (kx, ky) = (k.kx, k.ky);
    let (cx_, cy_) = (kx.cos(), ky.cos());
    let sy = ky.sin();
    let t = p.t;
    let h11 = -4.0 * I * p.t1 * sy * cx(p.ga, kx).sinh() + p.v + I * p.mu_a;
    let h22 = 4.0 * I * p.t1 * sy * cx(p.gb, kx).sinh() - p.v - I * p.mu_b;
    let h12 = -2.0 * t * cx(-p.gx, -p.gamma).exp() * cx_ - 2.0 * t * cx(-p.gy, p.gamma).exp() * cy_;
    let h21 = -2.0 * t * cx(p.gx, p.gamma).exp() * cx_ - 2.0 * t * cx(p.gy, -p.gamma).exp() * cy_;
    [h11, h12, h21, h22]
}

pub fn bloch_hamiltonian(p: &ModelParams, k: Momentum) -> ComplexMat {
    let [a, b, c, d] = bloch_entries(p, k);
    mat2(a, b, c, d)
}

pub fn d_vector(p: &ModelParams, k: Momentum) -> DVector {
    let [a, b, c, d] = bloch_entries(p, k);
    DVector::from_entries(a, b, c, d)
}

/// Discriminant η(k) of the Bloch matrix.
pub fn eta(p: &ModelParams, k: Momentum) -> Complex64 {
    let [a, b, c, d] = bloch_entries(p, k);
    discriminant_unchecked(&mat2(a, b, c, d))
}

/// (ε₊, ε₋) = (tr ± √η)/2 with the principal square root.
pub fn dispersion(p: &ModelParams, k: Momentum) -> (Complex64, Complex64) {
    let [a, b, c, d] = bloch_entries(p, k);
    let root = ((a - d) * (a - d) + 4.0 * b * c).sqrt();
    ((a + d + root) * 0.5, (a + d - root) * 0.5)
}

/// Closed-form dispersion valid with only nearest-neighbour hoppings.
pub fn weyl_dispersion(p: &ModelParams, k: Momentum) -> Result<(Complex64, Complex64)> {
    p.require_zero(
        &["t1", "ga", "gb", "v", "mu_a", "mu_b"],
        "nearest-neighbour only",
    )?;
    let f = 4.0 * k.kx.cos() * k.ky.cos();
    let phi = cx(p.gx - p.gy, 2.0 * p.gamma);
    let inside =
        f * phi.exp() + f * (-phi).exp() + 2.0 * ((2.0 * k.kx).cos() + (2.0 * k.ky).cos() + 2.0);
    let root = inside.sqrt() * p.t;
    Ok((root, -root))
}

/// Hopping block B(d) for c†_r c_{r+d}, indexed [from sublattice][to sublattice].
pub type Block = [[Complex64; 2]; 2];

/// Bond list of the model: displacement (dx, dy) with its 2×2 block.
pub fn hopping_blocks(p: &ModelParams) -> Vec<((i32, i32), Block)> {
    let t = p.t;
    let mut out: Vec<((i32, i32), Block)> = Vec::new();
    let mut add = |d: (i32, i32), s: usize, s2: usize, val: Complex64| {
        if let Some(entry) = out.iter_mut().find(|(dd, _)| *dd == d) {
            entry.1[s][s2] += val;
        } else {
            let mut b = [[Complex64::new(0.0, 0.0); 2]; 2];
            b[s][s2] = val;
            out.push((d, b));
        }
    };
    for dd in [1, -1] {
        add((dd, 0), 0, 1, -t * cx(-p.gx, -p.gamma).exp());
        add((0, dd), 0, 1, -t * cx(-p.gy, p.gamma).exp());
        add((-dd, 0), 1, 0, -t * cx(p.gx, p.gamma).exp());
        add((0, -dd), 1, 0, -t * cx(p.gy, -p.gamma).exp());
    }
    let (ea, eb) = (p.ga.exp(), p.gb.exp());
    let t1 = p.t1;
    add((1, 1), 0, 0, cx(-t1 / ea, 0.0));
    add((1, -1), 0, 0, cx(t1 / ea, 0.0));
    add((1, 1), 1, 1, cx(t1 / eb, 0.0));
    add((1, -1), 1, 1, cx(-t1 / eb, 0.0));
    add((-1, -1), 0, 0, cx(-t1 * ea, 0.0));
    add((-1, 1), 0, 0, cx(t1 * ea, 0.0));
    add((-1, -1), 1, 1, cx(t1 * eb, 0.0));
    add((-1, 1), 1, 1, cx(-t1 * eb, 0.0));
    add((0, 0), 0, 0, cx(p.v, p.mu_a));
    add((0, 0), 1, 1, cx(-p.v, -p.mu_b));
    out
}

/// Site index in the full lattice: sublattice-major, then x, then y.
pub fn site_index(s: usize, ix: usize, iy: usize, nx: usize, ny: usize) -> usize {
    s * nx * ny + ix * ny + iy
}

fn place(c: usize, d: i32, n: usize, bc: Boundary) -> Option<usize> {
    let target = c as i64 + d as i64;
    match bc {
        Boundary::Periodic => Some(target.rem_euclid(n as i64) as usize),
        Boundary::Open => (0..n as i64).contains(&target).then_some(target as usize),
    }
}

/// Real-space Hamiltonian.
///
/// Without `transverse_k` the result is the full 2·Nx·Ny lattice matrix with
/// [`site_index`] ordering. With `transverse_k` exactly one axis must be open;
/// the other is Bloch-reduced and the result is the 2·N_open ribbon matrix with
/// index `s·N_open + c`. The Bloch phase e^{−ik·d} is attached to every hop
/// along the periodic axis.
pub fn real_space_hamiltonian(
    p: &ModelParams,
    nx: usize,
    ny: usize,
    bc: [Boundary; 2],
    transverse_k: Option<f64>,
) -> Result<ComplexMat> {
    p.validate()?;
    if nx < 2 || ny < 2 {
        return Err(Error::Dimension(format!(
            "lattice {nx}x{ny} is smaller than 2x2"
        )));
    }
    let blocks = hopping_blocks(p);
    match transverse_k {
        None => {
            let n = 2 * nx * ny;
            let mut h = ComplexMat::zeros((n, n));
            for ix in 0..nx {
                for iy in 0..ny {
                    for &((dx, dy), b) in &blocks {
                        let (Some(jx), Some(jy)) =
                            (place(ix, dx, nx, bc[0]), place(iy, dy, ny, bc[1]))
                        else {
                            continue;
                        };
                        for s in 0..2 {
                            for s2 in 0..2 {
                                h[[
                                    site_index(s, ix, iy, nx, ny),
                                    site_index(s2, jx, jy, nx, ny),
                                ]] += b[s][s2];
                            }
                        }
                    }
                }
            }
            Ok(h)
        }
        Some(kt) => {
            let axis = match bc {
                [Boundary::Open, Boundary::Periodic] => Axis::X,
                [Boundary::Periodic, Boundary::Open] => Axis::Y,
                _ => {
                    return Err(Error::Precondition(
                        "a transverse momentum needs exactly one open axis".into(),
                    ))
                }
            };
            let n = if axis == Axis::X { nx } else { ny };
            Ok(ribbon_from_blocks(&blocks, axis, n, kt))
        }
    }
}

/// Ribbon Hamiltonian with `axis` open over `n` cells and Bloch momentum `kt` along the other.
pub fn ribbon_hamiltonian(p: &ModelParams, axis: Axis, n: usize, kt: f64) -> Result<ComplexMat> {
    p.validate()?;
    if n < 2 {
        return Err(Error::Dimension(format!(
            "ribbon width {n} is smaller than 2"
        )));
    }
    Ok(ribbon_from_blocks(&hopping_blocks(p), axis, n, kt))
}

fn ribbon_from_blocks(blocks: &[((i32, i32), Block)], axis: Axis, n: usize, kt: f64) -> ComplexMat {
    let mut h = ComplexMat::zeros((2 * n, 2 * n));
    for &((dx, dy), b) in blocks {
        let (d_open, d_per) = match axis {
            Axis::X => (dx, dy),
            Axis::Y => (dy, dx),
        };
        let phase = Complex64::from_polar(1.0, -kt * d_per as f64);
        for c in 0..n {
            let Some(c2) = place(c, d_open, n, Boundary::Open) else {
                continue;
            };
            for s in 0..2 {
                for s2 in 0..2 {
                    h[[s * n + c, s2 * n + c2]] += b[s][s2] * phase;
                }
            }
        }
    }
    h
}

/// Gap-closing staggered potentials (v₁, v₂) = ∓2t₁(cosh g_a + cosh g_b).
pub fn phase_boundaries(p: &ModelParams) -> (f64, f64) {
    let s = 2.0 * p.t1 * (p.ga.cosh() + p.gb.cosh());
    (-s, s)
}

/// Insulating phase of the gapped model with diagonal hoppings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    BandInsulator,
    TopologicalInsulator,
    BoundaryGapless,
}

pub fn phase_classify(p: &ModelParams, tol: f64) -> Result<Phase> {
    p.validate()?;
    p.require_zero(&["gx", "gy"], "diagonal-hopping insulator")?;
    if !(p.gamma > 0.0 && p.gamma < FRAC_PI_2) {
        return Err(Error::Regime {
            name: "gamma",
            value: p.gamma,
            regime: "diagonal-hopping insulator (0 < gamma < pi/2)",
        });
    }
    let (v1, v2) = phase_boundaries(p);
    let (lo, hi) = (v1.min(v2), v1.max(v2));
    Ok(if (p.v - v1).abs() < tol || (p.v - v2).abs() < tol {
        Phase::BoundaryGapless
    } else if p.v > lo && p.v < hi {
        Phase::TopologicalInsulator
    } else {
        Phase::BandInsulator
    })
}

/// Truncated bivariate polynomial c + cx·px + cy·py + cxx·px² + cxy·px·py + cyy·py².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poly2 {
    pub coeffs: [Complex64; 6],
}

impl Poly2 {
    pub const ZERO: Poly2 = Poly2 {
        coeffs: [Complex64::new(0.0, 0.0); 6],
    };

    pub fn constant(c: Complex64) -> Self {
        let mut p = Self::ZERO;
        p.coeffs[0] = c;
        p
    }

    fn px() -> Self {
        let mut p = Self::ZERO;
        p.coeffs[1] = Complex64::new(1.0, 0.0);
        p
    }

    fn py() -> Self {
        let mut p = Self::ZERO;
        p.coeffs[2] = Complex64::new(1.0, 0.0);
        p
    }

    pub fn eval(&self, px: f64, py: f64) -> Complex64 {
        let c = &self.coeffs;
        c[0] + c[1] * px + c[2] * py + c[3] * px * px + c[4] * px * py + c[5] * py * py
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Poly2 {
            coeffs: self.coeffs.map(|c| c * s),
        }
    }

    pub fn add(&self, o: &Poly2) -> Self {
        let mut out = *self;
        for (a, b) in out.coeffs.iter_mut().zip(o.coeffs) {
            *a += b;
        }
        out
    }

    /// Product truncated at total degree two.
    pub fn mul(&self, o: &Poly2) -> Self {
        let (a, b) = (&self.coeffs, &o.coeffs);
        Poly2 {
            coeffs: [
                a[0] * b[0],
                a[0] * b[1] + a[1] * b[0],
                a[0] * b[2] + a[2] * b[0],
                a[0] * b[3] + a[3] * b[0] + a[1] * b[1],
                a[0] * b[4] + a[4] * b[0] + a[1] * b[2] + a[2] * b[1],
                a[0] * b[5] + a[5] * b[0] + a[2] * b[2],
            ],
        }
    }

    /// Drops all terms above total degree `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let mut out = *self;
        if order < 2 {
            for c in &mut out.coeffs[3..] {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        if order < 1 {
            out.coeffs[1] = Complex64::new(0.0, 0.0);
            out.coeffs[2] = Complex64::new(0.0, 0.0);
        }
        out
    }
}

/// Second-order Taylor data of f(z0 + i·δ) given f(z0), f'(z0), f''(z0).
fn taylor(f0: Complex64, f1: Complex64, f2: Complex64, delta: &Poly2) -> Poly2 {
    Poly2::constant(f0)
        .add(&delta.scale(f1))
        .add(&delta.mul(delta).scale(f2 * 0.5))
}

/// Pauli components as polynomials in the momentum offset p = k − center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DVectorPoly {
    pub center: Momentum,
    pub d0: Poly2,
    pub dx: Poly2,
    pub dy: Poly2,
    pub dz: Poly2,
}

impl DVectorPoly {
    pub fn eval(&self, px: f64, py: f64) -> DVector {
        DVector {
            d0: self.d0.eval(px, py),
            dx: self.dx.eval(px, py),
            dy: self.dy.eval(px, py),
            dz: self.dz.eval(px, py),
        }
    }

    pub fn matrix(&self, px: f64, py: f64) -> ComplexMat {
        self.eval(px, py).to_matrix()
    }
}

/// Exact Taylor polynomial of the Bloch matrix about `center`, truncated at `order` ≤ 2.
pub fn taylor_expansion(p: &ModelParams, center: Momentum, order: usize) -> DVectorPoly {
    let (kx, ky) = (center.kx, center.ky);
    let (px, py) = (Poly2::px(), Poly2::py());
    let r = |x: f64| Complex64::new(x, 0.0);
    let cos_x = taylor(r(kx.cos()), r(-kx.sin()), r(-kx.cos()), &px);
    let cos_y = taylor(r(ky.cos()), r(-ky.sin()), r(-ky.cos()), &py);
    let sin_y = taylor(r(ky.sin()), r(ky.cos()), r(-ky.sin()), &py);
    // sinh(g + i(kx + px)): derivative with respect to px brings a factor i.
    let sinh_shift = |g: f64| {
        let z = cx(g, kx);
        taylor(z.sinh(), I * z.cosh(), -z.sinh(), &px)
    };
    let t = p.t;
    let h11 = sin_y
        .mul(&sinh_shift(p.ga))
        .scale(-4.0 * I * p.t1)
        .add(&Poly2::constant(cx(p.v, p.mu_a)));
    let h22 = sin_y
        .mul(&sinh_shift(p.gb))
        .scale(4.0 * I * p.t1)
        .add(&Poly2::constant(cx(-p.v, -p.mu_b)));
    let h12 = cos_x
        .scale(-2.0 * t * cx(-p.gx, -p.gamma).exp())
        .add(&cos_y.scale(-2.0 * t * cx(-p.gy, p.gamma).exp()));
    let h21 = cos_x
        .scale(-2.0 * t * cx(p.gx, p.gamma).exp())
        .add(&cos_y.scale(-2.0 * t * cx(p.gy, -p.gamma).exp()));
    let half = Complex64::new(0.5, 0.0);
    let d0 = h11.add(&h22).scale(half).truncate(order);
    let dz = h11.add(&h22.scale(r(-1.0))).scale(half).truncate(order);
    let dx = h12.add(&h21).scale(half).truncate(order);
    let dy = h12.add(&h21.scale(r(-1.0))).scale(I * 0.5).truncate(order);
    DVectorPoly {
        center,
        d0,
        dx,
        dy,
        dz,
    }
}

/// Which X point a linear expansion is taken about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum XPoint {
    X1,
    X2,
}

impl XPoint {
    pub fn momentum(self) -> Momentum {
        match self {
            XPoint::X1 => Momentum::x1(),
            XPoint::X2 => Momentum::x2(),
        }
    }

    /// +1 at X₁, −1 at X₂.
    pub fn sign(self) -> f64 {
        match self {
            XPoint::X1 => 1.0,
            XPoint::X2 => -1.0,
        }
    }
}

/// Linear (Weyl) expansion about an X point; requires nearest-neighbour hoppings only.
pub fn linear_expansion(p: &ModelParams, which: XPoint) -> Result<DVectorPoly> {
    p.require_zero(
        &["t1", "ga", "gb", "v", "mu_a", "mu_b"],
        "nearest-neighbour only",
    )?;
    Ok(taylor_expansion(p, which.momentum(), 1))
}

/// Eigenvalues ∓2t·√(2s·px·py·cosh(2iγ + gx − gy) + px² + py²) of the linear expansion.
pub fn linear_dispersion(
    p: &ModelParams,
    which: XPoint,
    px: f64,
    py: f64,
) -> (Complex64, Complex64) {
    let c = cx(p.gx - p.gy, 2.0 * p.gamma).cosh();
    let root = (2.0 * which.sign() * px * py * c + px * px + py * py).sqrt() * (2.0 * p.t);
    (-root, root)
}

/// Expansion centre for the quadratic (double-Weyl) forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadCenter {
    /// M = (π, 0); requires γ = 0.
    M,
    /// Γ = (0, 0); requires γ = π/2.
    Gamma,
}

/// Quadratic expansion about M (γ = 0) or Γ (γ = π/2) with v = gx = gy = 0.
pub fn quadratic_expansion(p: &ModelParams, center: QuadCenter) -> Result<DVectorPoly> {
    p.require_zero(
        &["v", "gx", "gy", "mu_a", "mu_b"],
        "diagonal-hopping semimetal",
    )?;
    let (k, want, label) = match center {
        QuadCenter::M => (
            Momentum::m(),
            0.0,
            "quadratic expansion about M (gamma = 0)",
        ),
        QuadCenter::Gamma => (
            Momentum::gamma(),
            FRAC_PI_2,
            "quadratic expansion about Gamma (gamma = pi/2)",
        ),
    };
    if (p.gamma - want).abs() > REGIME_TOL {
        return Err(Error::Regime {
            name: "gamma",
            value: p.gamma,
            regime: label,
        });
    }
    Ok(taylor_expansion(p, k, 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{adjoint, eigensystem2, frobenius};
    use approx::assert_relative_eq;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn regime1() -> ModelParams {
        ModelParams {
            gamma: 0.5,
            gx: 0.5,
            gy: 0.3,
            ..Default::default()
        }
    }

    fn topological_ribbon() -> ModelParams {
        ModelParams {
            t1: 0.75,
            gamma: 0.5,
            ga: 0.5,
            gb: 0.3,
            ..Default::default()
        }
    }

    #[test]
    fn x_points_of_regime1_give_zero_matrix() {
        let p = regime1();
        for (sx, sy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let h = bloch_hamiltonian(&p, Momentum::new(sx * FRAC_PI_2, sy * FRAC_PI_2));
            assert!(frobenius(&h) < 1e-15);
        }
    }

    #[test]
    fn gamma_point_hermitian_value() {
        let h = bloch_hamiltonian(&ModelParams::default(), Momentum::gamma());
        assert!(close(h[[0, 1]], cx(-4.0, 0.0), 1e-15));
        assert!(close(h[[1, 0]], cx(-4.0, 0.0), 1e-15));
        assert!(h[[0, 0]].norm() < 1e-15 && h[[1, 1]].norm() < 1e-15);
    }

    #[test]
    fn hermitian_limit() {
        let p = ModelParams {
            t1: 0.6,
            v: 0.3,
            gamma: 0.9,
            ..Default::default()
        };
        for &(kx, ky) in &[(0.1, 0.7), (-2.0, 1.3), (3.0, -0.4)] {
            let h = bloch_hamiltonian(&p, Momentum::new(kx, ky));
            assert!(frobenius(&(&h - &adjoint(&h))) < 1e-14);
        }
    }

    #[test]
    fn d_vector_reconstructs_and_mass_at_x1() {
        let p = topological_ribbon();
        let k = Momentum::new(0.4, -1.1);
        let d = d_vector(&p, k);
        assert!(frobenius(&(d.to_matrix() - bloch_hamiltonian(&p, k))) < 1e-14);
        let dz = d_vector(&p, Momentum::x1()).dz;
        let want = 2.0 * p.t1 * (p.ga.cosh() + p.gb.cosh());
        assert!(close(dz, cx(want, 0.0), 1e-13));
        assert!(close(d.eta(), eta(&p, k), 1e-12));
    }

    #[test]
    fn dispersions_agree() {
        let p = ModelParams::default();
        let (ep, em) = dispersion(&p, Momentum::gamma());
        assert!(close(ep, cx(4.0, 0.0), 1e-14) && close(em, cx(-4.0, 0.0), 1e-14));
        let p = regime1();
        for &(kx, ky) in &[(0.2, 0.9), (-1.7, 2.5), (FRAC_PI_2, FRAC_PI_2)] {
            let k = Momentum::new(kx, ky);
            let (a, b) = dispersion(&p, k);
            let (c, d) = weyl_dispersion(&p, k).unwrap();
            assert!(close(a, c, 1e-12) && close(b, d, 1e-12), "{a} {b} {c} {d}");
            let es = eigensystem2(&bloch_hamiltonian(&p, k), 1e-12).unwrap();
            let mut mine = [a, b];
            mine.sort_by(crate::algebra::cmp_re_im);
            assert!(close(mine[0], es.eigenvalues[0], 1e-12));
        }
        assert!(weyl_dispersion(&topological_ribbon(), Momentum::gamma()).is_err());
    }

    #[test]
    fn boundaries() {
        let (v1, v2) = phase_boundaries(&topological_ribbon());
        assert_relative_eq!(v2, 1.5 * (0.5f64.cosh() + 0.3f64.cosh()), epsilon = 1e-15);
        assert_relative_eq!(v1, -v2);
        assert_eq!(phase_boundaries(&ModelParams::default()), (-0.0, 0.0));
        let p = ModelParams {
            t1: 1.0,
            ..Default::default()
        };
        assert_eq!(phase_boundaries(&p), (-4.0, 4.0));
    }

    #[test]
    fn classification() {
        let mut p = ModelParams {
            t1: 0.75,
            ga: 0.5,
            gb: 0.5,
            gamma: 0.5,
            ..Default::default()
        };
        assert_eq!(
            phase_classify(&p, 1e-9).unwrap(),
            Phase::TopologicalInsulator
        );
        p.v = 10.0;
        assert_eq!(phase_classify(&p, 1e-9).unwrap(), Phase::BandInsulator);
        p.v = phase_boundaries(&p).1;
        assert_eq!(phase_classify(&p, 1e-9).unwrap(), Phase::BoundaryGapless);
        assert!(eta(&p, Momentum::x2()).norm() < 1e-12);
        p.gx = 0.1;
        assert!(phase_classify(&p, 1e-9).is_err());
    }

    #[test]
    fn ribbon_entry_points_agree() {
        let p = topological_ribbon();
        let h = ribbon_hamiltonian(&p, Axis::X, 4, 0.3).unwrap();
        assert_eq!(h.dim(), (8, 8));
        let full =
            real_space_hamiltonian(&p, 4, 3, [Boundary::Open, Boundary::Periodic], Some(0.3))
                .unwrap();
        assert_eq!(h, full);
        assert!(real_space_hamiltonian(&p, 4, 4, [Boundary::Open; 2], Some(0.1)).is_err());
        assert!(real_space_hamiltonian(&p, 1, 4, [Boundary::Periodic; 2], None).is_err());
    }

    #[test]
    fn blocks_sum_to_bloch_matrix() {
        let p = ModelParams {
            mu_a: 0.2,
            mu_b: -0.1,
            ..topological_ribbon()
        };
        let k = Momentum::new(0.3, 0.7);
        let mut h = ComplexMat::zeros((2, 2));
        for ((dx, dy), b) in hopping_blocks(&p) {
            let ph = Complex64::from_polar(1.0, -(k.kx * dx as f64 + k.ky * dy as f64));
            for s in 0..2 {
                for s2 in 0..2 {
                    h[[s, s2]] += b[s][s2] * ph;
                }
            }
        }
        assert!(frobenius(&(h - bloch_hamiltonian(&p, k))) < 1e-14);
    }

    #[test]
    fn expansions_exact_at_center() {
        let p = regime1();
        let lin = linear_expansion(&p, XPoint::X1).unwrap();
        assert!(frobenius(&lin.matrix(0.0, 0.0)) < 1e-15);
        assert!(lin.dz.coeffs.iter().all(|c| c.norm() < 1e-15));
        assert!(linear_expansion(&topological_ribbon(), XPoint::X1).is_err());

        let q = ModelParams {
            gamma: 0.0,
            ..topological_ribbon()
        };
        let quad = quadratic_expansion(&q, QuadCenter::M).unwrap();
        let h = bloch_hamiltonian(&q, Momentum::m());
        assert!(frobenius(&(quad.matrix(0.0, 0.0) - h)) < 1e-15);
        assert!(quadratic_expansion(&q, QuadCenter::Gamma).is_err());
        let same = ModelParams { gb: 0.5, ..q };
        let quad = quadratic_expansion(&same, QuadCenter::M).unwrap();
        assert!(quad.d0.coeffs.iter().all(|c| c.norm() < 1e-14));
    }

    #[test]
    fn linear_eigenvalues_match_closed_form() {
        let p = regime1();
        for which in [XPoint::X1, XPoint::X2] {
            let lin = linear_expansion(&p, which).unwrap();
            let (px, py) = (0.013, -0.021);
            let es = eigensystem2(&lin.matrix(px, py), 1e-12).unwrap();
            let (a, b) = linear_dispersion(&p, which, px, py);
            let mut want = [a, b];
            want.sort_by(crate::algebra::cmp_re_im);
            for (x, y) in es.eigenvalues.iter().zip(&want) {
                assert!(close(*x, *y, 1e-12), "{which:?}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn momentum_wrapping() {
        let k = Momentum::new(PI, 3.0 * PI);
        assert_eq!(k.kx, -PI);
        assert!((k.ky + PI).abs() < 1e-15);
        assert!(Momentum::new(3.1, 0.0).distance(&Momentum::new(-3.1, 0.0)) < 0.09);
    }
}
