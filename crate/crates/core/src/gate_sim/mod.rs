//! Pulse-sequence execution on two spin qubits coupled to the stretch mode.
//!
//! Two interchangeable representations of the joint state are available:
//! an analytic one that tracks coherent displacement branches and traces over
//! the thermal mode in closed form, and a truncated Fock-space one that
//! integrates the driven mode numerically.

mod closed_form;
pub mod fock;
mod joint;
mod sequence;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum_core::{DensityMatrix, DD};

pub use closed_form::{model_populations_eq4, EchoModelParams};
pub use joint::{BranchState, FockState, JointState, SPIN_DIFFERENCE};
pub use sequence::{build_echo_sequence, build_echo_sequence_with_phase, EchoKind, PulseOp, PulseSequence};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    #[default]
    Analytic,
    Fock,
}

impl std::str::FromStr for SimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "analytic" => Ok(Self::Analytic),
            "fock" => Ok(Self::Fock),
            other => Err(Error::Config(format!("unknown simulation mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimOptions {
    #[serde(default)]
    pub mode: SimMode,
    #[serde(default = "default_fock_dim")]
    pub fock_dim: usize,
    /// Mean thermal occupation of the stretch mode.
    #[serde(default)]
    pub nbar: f64,
    /// Single-qubit dephasing rate in s⁻¹.
    #[serde(default, rename = "gamma_s_inv")]
    pub gamma: f64,
    /// Use `χ(β) = e^{−(n̄+½)|β|²}` for the thermal trace instead of the
    /// ground-state `e^{−|β|²/2}`.
    #[serde(default)]
    pub include_thermal_coherence_factor: bool,
    #[serde(default = "default_steps")]
    pub fock_steps_per_period: u32,
}

fn default_fock_dim() -> usize {
    30
}

fn default_steps() -> u32 {
    fock::DEFAULT_STEPS_PER_PERIOD
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            mode: SimMode::Analytic,
            fock_dim: default_fock_dim(),
            nbar: 0.0,
            gamma: 0.0,
            include_thermal_coherence_factor: false,
            fock_steps_per_period: default_steps(),
        }
    }
}

impl SimOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.nbar >= 0.0 && self.nbar.is_finite()) {
            return Err(Error::ContractViolation(format!("n̄ = {} must be ≥ 0", self.nbar)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::ContractViolation(format!("Γ = {} must be ≥ 0", self.gamma)));
        }
        if self.mode == SimMode::Fock && self.fock_dim < 2 {
            return Err(Error::ContractViolation("Fock dimension must be ≥ 2".into()));
        }
        if self.fock_steps_per_period == 0 {
            return Err(Error::ContractViolation("fock_steps_per_period must be positive".into()));
        }
        Ok(())
    }
}

/// Runs `seq` from `|↓↓⟩ ⊗ ρ_th` and returns the reduced spin state.
pub fn run_sequence(seq: &PulseSequence, options: &SimOptions) -> Result<DensityMatrix> {
    run_sequence_from(&DensityMatrix::basis(DD), seq, options)
}

/// Runs `seq` from `initial ⊗ ρ_th` and returns the reduced spin state.
pub fn run_sequence_from(
    initial: &DensityMatrix,
    seq: &PulseSequence,
    options: &SimOptions,
) -> Result<DensityMatrix> {
    seq.validate()?;
    let mut state = JointState::new(initial, options)?;
    for op in &seq.ops {
        match *op {
            PulseOp::CarrierRotation { theta_rad, phi_rad } => state.apply_carrier(theta_rad, phi_rad),
            PulseOp::ForcePulse(p) => state.apply_force_pulse(&p, options)?,
            PulseOp::Wait { t_s } => state.apply_qubit_dephasing(options.gamma, t_s)?,
        }
    }
    Ok(state.trace_out_motion())
}
