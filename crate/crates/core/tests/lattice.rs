use std::f64::consts::PI;

use nhdeg::algebra::{adjoint, eigenvalues_n, frobenius};
use nhdeg::model::{
    bloch_hamiltonian, d_vector, dispersion, eta, phase_boundaries, real_space_hamiltonian,
    ribbon_hamiltonian, Axis,
};
use nhdeg::{discriminant, Boundary, Complex64, ModelParams, Momentum};
use proptest::prelude::*;

fn generic_params() -> impl Strategy<Value = ModelParams> {
    (
        0.5..1.5f64,
        -1.0..1.0f64,
        -1.0..1.0f64,
        0.0..PI,
        prop::array::uniform6(-1.0..1.0f64),
    )
        .prop_map(|(t, t1, v, gamma, g)| ModelParams {
            t,
            t1,
            v,
            gamma,
            gx: g[0],
            gy: g[1],
            ga: g[2],
            gb: g[3],
            mu_a: g[4],
            mu_b: g[5],
        })
}

fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

fn bloch_union(p: &ModelParams, nx: usize, ny: usize) -> Vec<Complex64> {
    let mut out = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let k = Momentum::new(
                2.0 * PI * i as f64 / nx as f64,
                2.0 * PI * j as f64 / ny as f64,
            );
            let (a, b) = dispersion(p, k);
            out.extend([a, b]);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn torus_spectrum_is_union_of_bloch_bands(p in generic_params(), nx in 2usize..7, ny in 2usize..7) {
        let h = real_space_hamiltonian(&p, nx, ny, [Boundary::Periodic; 2], None).unwrap();
        let real = eigenvalues_n(&h).unwrap();
        let bloch = bloch_union(&p, nx, ny);
        prop_assert_eq!(real.len(), bloch.len());
        let d = multiset_distance(&bloch, &real);
        prop_assert!(d < 1e-8, "distance {d}");
    }

    #[test]
    fn ribbon_trace_is_onsite_only(p in generic_params(), n in 3usize..7, kt in -PI..PI) {
        // Every hop with a transverse component also moves along the open axis.
        let h = ribbon_hamiltonian(&p, Axis::Y, n, kt).unwrap();
        let tr: Complex64 = (0..2 * n).map(|i| h[[i, i]]).sum();
        let onsite = Complex64::new(0.0, p.mu_a - p.mu_b) * n as f64;
        prop_assert!((tr - onsite).norm() < 1e-12 * (1.0 + tr.norm()));
    }

    #[test]
    fn hermitian_parameters_give_hermitian_bloch_matrices(
        t in 0.5..1.5f64, t1 in -1.0..1.0f64, v in -1.0..1.0f64, gamma in 0.0..PI, kx in -PI..PI, ky in -PI..PI
    ) {
        let p = ModelParams { t, t1, v, gamma, ..Default::default() };
        let h = bloch_hamiltonian(&p, Momentum::new(kx, ky));
        prop_assert!(frobenius(&(&h - &adjoint(&h))) < 1e-14);
    }

    #[test]
    fn gap_closes_at_x_points_on_the_phase_boundaries(t1 in 0.05..1.5f64, ga in -1.5..1.5f64, gb in -1.5..1.5f64, gamma in 0.01..1.56f64) {
        let base = ModelParams { t1, ga, gb, gamma, ..Default::default() };
        let (v1, v2) = phase_boundaries(&base);
        let scale = 1.0 + (v1 * v1).max(v2 * v2);
        let e1 = eta(&ModelParams { v: v1, ..base }, Momentum::x1());
        let e2 = eta(&ModelParams { v: v2, ..base }, Momentum::x2());
        prop_assert!(e1.norm() < 1e-10 * scale, "{e1}");
        prop_assert!(e2.norm() < 1e-10 * scale, "{e2}");
    }

    #[test]
    fn d_vector_reconstructs_the_bloch_matrix(p in generic_params(), kx in -PI..PI, ky in -PI..PI) {
        let k = Momentum::new(kx, ky);
        let h = bloch_hamiltonian(&p, k);
        let d = d_vector(&p, k);
        prop_assert!(frobenius(&(d.to_matrix() - &h)) < 1e-13 * (1.0 + frobenius(&h)));
        let disc = discriminant(&h).unwrap();
        prop_assert!((d.eta() - disc).norm() < 1e-12 * (1.0 + disc.norm()));
        prop_assert!((eta(&p, k) - disc).norm() < 1e-12 * (1.0 + disc.norm()));
        let (a, b) = dispersion(&p, k);
        let tr = h[[0, 0]] + h[[1, 1]];
        prop_assert!((a + b - tr).norm() < 1e-12 * (1.0 + tr.norm()));
        prop_assert!(((a - b) * (a - b) - disc).norm() < 1e-11 * (1.0 + disc.norm()));
    }

    #[test]
    fn momentum_is_periodic(p in generic_params(), kx in -PI..PI, ky in -PI..PI, mx in -2i32..3, my in -2i32..3) {
        let a = bloch_hamiltonian(&p, Momentum::new(kx, ky));
        let b = bloch_hamiltonian(&p, Momentum::new(kx + 2.0 * PI * mx as f64, ky + 2.0 * PI * my as f64));
        prop_assert!(frobenius(&(a - b)) < 1e-12);
    }
}

#[test]
fn open_boundaries_differ_from_the_torus_only_by_seam_bonds() {
    let p = ModelParams {
        t1: 0.4,
        gamma: 0.3,
        gx: 0.2,
        ga: 0.5,
        gb: -0.1,
        ..Default::default()
    };
    let (nx, ny) = (5, 4);
    let torus = real_space_hamiltonian(&p, nx, ny, [Boundary::Periodic; 2], None).unwrap();
    let open = real_space_hamiltonian(&p, nx, ny, [Boundary::Open; 2], None).unwrap();
    for ((i, j), z) in open.indexed_iter() {
        if z.norm() > 0.0 {
            assert!((z - torus[[i, j]]).norm() < 1e-14);
        }
    }
    assert!(frobenius(&open) < frobenius(&torus));
}

#[test]
fn ribbon_with_periodic_axis_matches_mixed_boundaries() {
    let p = ModelParams {
        t1: 0.75,
        gamma: 0.5,
        ga: 0.5,
        gb: 0.3,
        ..Default::default()
    };
    let n = 6;
    let m = 4;
    // Union over allowed transverse momenta of ribbon spectra = mixed-boundary real-space spectrum.
    let mixed =
        real_space_hamiltonian(&p, m, n, [Boundary::Periodic, Boundary::Open], None).unwrap();
    let real = eigenvalues_n(&mixed).unwrap();
    let mut union = Vec::new();
    for j in 0..m {
        let kx = 2.0 * PI * j as f64 / m as f64;
        let h = ribbon_hamiltonian(&p, Axis::Y, n, kx).unwrap();
        union.extend(eigenvalues_n(&h).unwrap());
    }
    assert!(multiset_distance(&union, &real) < 1e-8);
}
