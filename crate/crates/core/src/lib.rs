//! Core library for `dephasim`: a simulator for a two-state system (an
//! electron on a double quantum dot) monitored by a two-barrier
//! point-contact detector.
//!
//! The crate is organized around four stages of the problem:
//!
//! - [`smatrix`] builds and validates the 2x2 scattering matrices of the
//!   two detector barriers from a three-angle parameterization.
//! - [`influence`] computes the complex influence of repeated detector
//!   probings on the measured system: the decoherence rate, the induced
//!   energy shift, their dependence on the detector current direction,
//!   and the resulting interference-fringe predictions.
//! - [`bloch`] integrates the damped polarization-vector equation of
//!   motion and classifies the dynamical regime (weak/strong damping,
//!   frozen-dot validity, quantum-Zeno slowdown).
//! - [`counting`] provides exact and Monte Carlo statistics of the
//!   detector transmission record in the frozen-dot regime: sequence
//!   probabilities, count distributions, window correlations, and
//!   reproducible telegraph-signal generation.
//!
//! All quantities use natural units (hbar = e = 1), so rates and
//! energies share the dimension 1/time.

pub mod bloch;
pub mod counting;
mod error;
pub mod influence;
pub mod smatrix;

pub use bloch::{DampingRegime, EvolutionParams, PolarizationState, RegimeReport, Trajectory};
pub use counting::{CountDistribution, Dot, MixtureSpec, OutcomeSequence, RunSample};
pub use error::Error;
pub use influence::{DetectorSetup, InfluenceResult};
pub use smatrix::{BarrierParams, Direction, ScatteringMatrix};
