//! Light-induced gauge potentials for three-level Lambda atoms in two
//! offset, counterpropagating laser beams.
//!
//! The crate computes the dark-state vector and scalar potentials on a grid,
//! the resulting effective magnetic field and its scales, the adiabaticity of
//! the dark state for moving atoms, Landau-level spectra in the Landau gauge,
//! and split-operator wavepacket dynamics (cyclotron orbits, Hall drift).
//!
//! Internal units: hbar = m = 1, lengths in units of `1/k_unit`.

pub mod adiabaticity;
pub mod beams;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod fieldio;
pub mod fit;
pub mod gauge;
pub mod grid;
pub mod spectrum;
pub mod tridiag;
pub mod units;
pub mod verify;

pub use adiabaticity::{adiabaticity_report, AdiabaticityReport, MotionSpec};
pub use beams::{
    rabi_profile, ratio_field, relative_width, BeamPairConfig, GaussianBeamParams, Propagation, RatioField,
    RelativeWidth, WidthLaw, WidthModel,
};
pub use config::{parse_config, RunConfig};
pub use dynamics::{
    evolve, run_cyclotron, run_hall_drift, DynamicsSetup, EvolutionConfig, Trajectory, WavepacketState,
};
pub use error::{Error, Result};
pub use fieldio::{read_field, write_field, FieldFormat};
pub use gauge::{
    compensating_trap, field_scales, flux_through, magnetic_field, scalar_potential, vector_potential,
    FieldMode, FieldScales, Flux, GaugeFields, LineProfile, TrapSpec,
};
pub use grid::{curl_z, gradient, make_grid, Grid2D, ScalarField2D, VectorField2D};
pub use spectrum::{landau_analysis, landau_bands, BandStructure, LandauReport, SpectrumConfig};
pub use units::{SiAdapter, UnitSystem};
