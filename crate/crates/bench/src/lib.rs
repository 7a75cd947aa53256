//! Shared fixtures for the criterion benchmarks.

use nhdeg::ModelParams;

/// Regime with only nearest-neighbour hoppings: four protected X-point degeneracies.
pub fn nearest_neighbour() -> ModelParams {
    ModelParams {
        gamma: 0.5,
        gx: 0.5,
        gy: 0.3,
        ..ModelParams::default()
    }
}

/// Topological ribbon parameters with diagonal nonreciprocity.
pub fn ribbon_params() -> ModelParams {
    ModelParams {
        t1: 0.75,
        gamma: 0.5,
        ga: 0.5,
        gb: 0.3,
        ..ModelParams::default()
    }
}
