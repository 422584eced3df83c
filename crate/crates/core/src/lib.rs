//! Spectral Galerkin simulation of the viscously regularized diffusion
//! equation
//!
//! ```text
//! u' = div(alpha grad mu),   mu = beta u' + psi'(u)
//! ```
//!
//! on an interval with prescribed normal flux of `mu`, together with the
//! threshold-dissipation variant whose slow-driving limit is a play operator.
//!
//! Modules:
//! - [`basis`]: Neumann eigenbasis, quadrature, projection
//! - [`energy`]: free-energy models
//! - [`galerkin`]: coefficient ODE system and time stepping
//! - [`diagnostics`]: mass, free energy, dissipation, energy-balance residual
//! - [`hysteresis`]: zigzag driver, play operator, viscous scalar system

pub mod basis;
pub mod config;
pub mod diagnostics;
pub mod energy;
pub mod error;
pub mod galerkin;
pub mod hysteresis;

pub use basis::{IntervalDomain, Mode, Quadrature, SpectralCoeffs};
pub use config::{FluxData, FluxProfile, HysteresisConfig, InitialDatum, Scheme, SimulationConfig};
pub use diagnostics::DiagnosticsRecord;
pub use energy::{EnergyKind, FreeEnergyModel, GrowthBounds};
pub use error::{Error, Result};
pub use galerkin::{run, GalerkinSystem, Sample, SolverState, Trajectory};
pub use hysteresis::{HysteresisRun, HysteresisSample, PlayState, ViscousScalarState};
