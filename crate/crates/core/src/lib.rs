//! Simulation and analysis of a two-ion spin-qubit gate driven by an
//! oscillating spin-dependent force.
//!
//! The crate is layered bottom-up:
//!
//! * [`quantum_core`]: complex matrices, Pauli algebra, Bell-class fidelity and
//!   Wootters entanglement measures.
//! * [`trap_physics`]: calibration formulas from trap and beam geometry to the
//!   gate parameters.
//! * [`gate_sim`]: pulse-sequence execution on the spin ⊗ stretch-mode system,
//!   analytic and truncated-Fock paths, and the closed-form population model.
//! * [`measurement`]: three-outcome readout, preparation and readout errors,
//!   seeded shot noise and scan generation.
//! * [`tomography`]: harmonic fits, linear inversion, maximum-likelihood
//!   projection, the decoherence-model fit and the parity coherence bound.
//! * [`config`] and [`presets`]: on-disk run configuration and the built-in
//!   experiment presets.

pub mod config;
pub mod error;
pub mod gate_sim;
pub mod lm;
pub mod measurement;
pub mod presets;
pub mod quantum_core;
pub mod tomography;
pub mod trap_physics;

pub use error::{Error, Result};
