//! Shared fixtures for the benchmarks.

use hcm_core::cmcheck::seeded_mixture_atoms;
use hcm_core::{bernstein_mixture, Axis, FunctionHandle, GridSpec};

/// `e^{-s - x/s} / s`, whose integral over `(0, ∞)` is `2 K₀(2√x)`.
pub fn k0_integrand(x: f64) -> impl Fn(f64) -> f64 + Sync {
    move |s| (-s - x / s).exp() / s
}

/// A seeded three-dimensional Bernstein mixture.
pub fn mixture(seed: u64) -> FunctionHandle {
    bernstein_mixture(&seeded_mixture_atoms(seed, 3, 5.0)).expect("seeded atoms are valid")
}

pub fn cube_grid(n: usize) -> GridSpec {
    GridSpec::cube(Axis::linear(0.1, 5.0, n), 3)
}
