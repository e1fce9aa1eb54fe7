//! Shared fixtures for the gaugesim benchmarks.

use gaugesim_core::dynamics::DynamicsSetup;
use gaugesim_core::{make_grid, BeamPairConfig, Grid2D};

/// Canonical x window of +-6a at dx = a/200 with `ny` rows.
pub fn canonical_grid(ny: usize) -> Grid2D {
    make_grid(-150.0, 150.0, 0.0, 10.0, 2401, ny).expect("valid grid")
}

pub fn canonical_beams() -> BeamPairConfig {
    BeamPairConfig::canonical()
}

/// Canonical cyclotron setup on an `n x n` box with `steps` steps.
pub fn dynamics_setup(n: usize, steps: usize) -> DynamicsSetup {
    let mut s = DynamicsSetup::canonical();
    s.nx = n;
    s.ny = n;
    s.evolution.n_steps = steps;
    s.evolution.sample_every = steps;
    s.evolution.track_energy = false;
    s
}
