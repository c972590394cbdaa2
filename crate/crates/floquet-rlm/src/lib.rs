//! Time-resolved charge, energy, and heat transport of a harmonically
//! driven resonant level coupled to one wide-band fermionic reservoir.
//!
//! The library computes the exact driven Green function, all time-resolved
//! fluxes (charge current, the three energy fluxes and the ac source power),
//! both heat-flux definitions, the Floquet scattering matrix, and the
//! slow-driving expansion — with every quantity available through at least
//! two independent computational paths so the physics identities
//! (conservation, energy reactance, the instantaneous Joule law with the
//! universal resistance R_q = π) can be audited numerically.
//!
//! Start from the `examples/` directory: each file is a runnable tour of one
//! capability. The thin `floquet-rlm` binary drives the same machinery from
//! declarative TOML scenarios.

pub mod adiabatic;
pub mod bessel;
pub mod config;
pub mod error;
pub mod flux;
pub mod green;
pub mod grid;
pub mod harmonic_flux;
pub mod model;
pub mod output;
pub mod runner;
pub mod scattering;
pub mod quad;

pub use adiabatic::{joule_fit, AdiabaticEngine, AdiabaticPoint, AdiabaticReport, JouleFit};
pub use config::{OutputFormat, RunKind, Scenario, ScenarioConfig};
pub use error::{Error, Result};
pub use flux::{FluxEngine, FluxPoint, FluxTrace, QuadratureConfig};
pub use harmonic_flux::{DualPathReport, HarmonicFlux, HarmonicWorkspace};
pub use scattering::{build_smatrix, energy_flux_scattering, FloquetSMatrix, ScatteringEnergyFlux};
pub use green::{DrivenGreen, FloquetHarmonics, TruncationPolicy};
pub use grid::EnergyGrid;
pub use model::{ModelParams, H_PLANCK, R_Q};
