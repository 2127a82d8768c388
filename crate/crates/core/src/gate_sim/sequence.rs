use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trap_physics::ForcePulseParams;

/// One step of an experiment program. Angles in rad, durations in s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum PulseOp {
    CarrierRotation {
        theta_rad: f64,
        phi_rad: f64,
    },
    ForcePulse(ForcePulseParams),
    Wait {
        t_s: f64,
    },
}

impl PulseOp {
    pub fn carrier(theta: f64, phi: f64) -> Self {
        Self::CarrierRotation { theta_rad: theta, phi_rad: phi }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::CarrierRotation { theta_rad, phi_rad } => {
                if !(theta_rad.is_finite() && phi_rad.is_finite()) {
                    return Err(Error::ContractViolation("non-finite carrier angle".into()));
                }
            }
            Self::ForcePulse(p) => p.validate()?,
            Self::Wait { t_s } => {
                if !(t_s >= 0.0 && t_s.is_finite()) {
                    return Err(Error::ContractViolation(format!("wait duration {t_s} < 0")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PulseSequence {
    pub ops: Vec<PulseOp>,
}

impl PulseSequence {
    pub fn new(ops: Vec<PulseOp>) -> Self {
        Self { ops }
    }

    pub fn push(&mut self, op: PulseOp) -> &mut Self {
        self.ops.push(op);
        self
    }

    /// Returns a copy with an analysis rotation appended.
    pub fn then_carrier(&self, theta: f64, phi: f64) -> Self {
        let mut ops = self.ops.clone();
        ops.push(PulseOp::carrier(theta, phi));
        Self { ops }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ops.is_empty() {
            return Err(Error::ContractViolation("pulse sequence is empty".into()));
        }
        self.ops.iter().try_for_each(PulseOp::validate)
    }

    pub fn force_pulses(&self) -> impl Iterator<Item = &ForcePulseParams> {
        self.ops.iter().filter_map(|op| match op {
            PulseOp::ForcePulse(p) => Some(p),
            _ => None,
        })
    }
}

/// Where the force pulse sits in the spin echo.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EchoKind {
    /// Force pulse in the first gap only.
    #[serde(alias = "single_w")]
    SingleW,
    /// Force pulse in both gaps; the light-shift rotations cancel.
    #[serde(alias = "double_w")]
    DoubleW,
}

impl EchoKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::SingleW => "single_w",
            Self::DoubleW => "double_w",
        }
    }
}

impl fmt::Display for EchoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EchoKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single_w" | "single-w" | "singlew" => Ok(Self::SingleW),
            "double_w" | "double-w" | "doublew" => Ok(Self::DoubleW),
            other => Err(Error::Config(format!("unknown echo preset {other:?}"))),
        }
    }
}

/// `π/2 - [W] - π - [W] - π/2`, all carrier pulses at phase 0.
pub fn build_echo_sequence(kind: EchoKind, params: ForcePulseParams) -> PulseSequence {
    build_echo_sequence_with_phase(kind, params, 0.0)
}

/// Echo whose closing `π/2` pulse has phase `final_phi`.
///
/// For [`EchoKind::SingleW`], choosing `final_phi = Δ_c τ` makes the closing
/// pulse follow the frame rotated by the light shift; the output is then a
/// Bell-class state with `r = 2Δ_c τ − π/2`.
pub fn build_echo_sequence_with_phase(
    kind: EchoKind,
    params: ForcePulseParams,
    final_phi: f64,
) -> PulseSequence {
    let mut seq = PulseSequence::default();
    seq.push(PulseOp::carrier(FRAC_PI_2, 0.0));
    seq.push(PulseOp::ForcePulse(params));
    seq.push(PulseOp::carrier(PI, 0.0));
    if kind == EchoKind::DoubleW {
        seq.push(PulseOp::ForcePulse(params));
    }
    seq.push(PulseOp::carrier(FRAC_PI_2, final_phi));
    seq
}
