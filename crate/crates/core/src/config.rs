//! On-disk run configuration.
//!
//! Files are JSON with the unit in every field name: cyclic frequencies in
//! Hz, durations in µs, angles in degrees or radians as named. Everything is
//! converted to rad/s, s and rad on ingestion.

use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate_sim::{build_echo_sequence_with_phase, EchoKind, EchoModelParams, PulseSequence, SimOptions};
use crate::measurement::{uniform_phis, ReadoutModel, ScanSpec};
use crate::trap_physics::{
    beta_for_force_phase, carrier_light_shift, mode_frequencies, ForcePulseParams, TrapConfig, ATOMIC_MASS_UNIT,
    CA40_MASS_U,
};

fn default_mass_u() -> f64 {
    CA40_MASS_U
}

fn default_lambda_nm() -> f64 {
    397.0
}

/// Trap and beam geometry. Exactly one of `beta_deg` and `delta_phi_rad` sets
/// the polarization; the other is derived.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapFile {
    pub omega_c_hz: f64,
    #[serde(default = "default_mass_u")]
    pub ion_mass_u: f64,
    #[serde(default = "default_lambda_nm")]
    pub lambda_nm: f64,
    pub theta_l_deg: f64,
    pub theta_a_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_phi_rad: Option<f64>,
    pub omega_0_hz: f64,
    pub carrier_rabi_hz: f64,
}

impl TrapFile {
    pub fn to_trap_config(&self) -> Result<TrapConfig> {
        let theta_a = self.theta_a_deg.to_radians();
        let beta = match (self.beta_deg, self.delta_phi_rad) {
            (Some(b), None) => b.to_radians(),
            (None, Some(dphi)) => beta_for_force_phase(theta_a, dphi)?,
            _ => return Err(Error::Config("trap: give exactly one of beta_deg and delta_phi_rad".into())),
        };
        let cfg = TrapConfig {
            omega_c: TAU * self.omega_c_hz,
            ion_mass: self.ion_mass_u * ATOMIC_MASS_UNIT,
            lambda: self.lambda_nm * 1e-9,
            theta_l: self.theta_l_deg.to_radians(),
            theta_a,
            beta,
            omega_0: TAU * self.omega_0_hz,
            carrier_rabi: TAU * self.carrier_rabi_hz,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// The experiment program: a spin echo built from force-pulse parameters, or
/// an explicit list of operations in SI units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceFile {
    Echo {
        echo: EchoKind,
        delta_hz: f64,
        /// Defaults to the trap calibration chain.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega_f_hz: Option<f64>,
        /// Defaults to one loop, `1/|δ|`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau_us: Option<f64>,
        /// Defaults to the off-resonant carrier light shift at `ω = ω_s + δ`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta_c_hz: Option<f64>,
        /// Closing π/2 pulse follows the light-shift frame, phase `Δ_c τ`.
        #[serde(default)]
        frame_tracking: bool,
    },
    Inline {
        ops: PulseSequence,
    },
}

/// `points` equally spaced values from `start` to `stop` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauGrid {
    pub start_us: f64,
    pub stop_us: f64,
    pub points: usize,
}

impl TauGrid {
    pub fn values_s(&self) -> Vec<f64> {
        match self.points {
            0 => vec![],
            1 => vec![self.start_us * 1e-6],
            n => (0..n)
                .map(|k| (self.start_us + (self.stop_us - self.start_us) * k as f64 / (n - 1) as f64) * 1e-6)
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanKind {
    #[default]
    Phi,
    Tau,
}

fn default_phi_points() -> usize {
    36
}

/// Measurement grid. φ scans use `phi_points` uniform angles over `[0, 2π)` at
/// every θ in `theta_rad`; τ scans use `tau` without analysis pulse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanFile {
    #[serde(default)]
    pub kind: ScanKind,
    #[serde(default)]
    pub theta_rad: Vec<f64>,
    #[serde(default = "default_phi_points")]
    pub phi_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<TauGrid>,
    pub shots: u64,
    pub seed: u64,
    #[serde(default)]
    pub exact: bool,
    #[serde(default)]
    pub resolved: bool,
}

/// Starting point for the closed-form model fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitGuessFile {
    pub gamma_s_inv: f64,
    pub delta_hz: f64,
    pub omega_f_hz: f64,
    pub delta_c_hz: f64,
}

impl FitGuessFile {
    pub fn to_params(&self) -> EchoModelParams {
        EchoModelParams {
            gamma: self.gamma_s_inv,
            delta: TAU * self.delta_hz,
            omega_f: TAU * self.omega_f_hz,
            delta_c: TAU * self.delta_c_hz,
        }
    }
}

/// Analysis switches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisFile {
    /// Invert (tomography, parity) or model (fit) the readout confusion.
    #[serde(default)]
    pub correct_readout: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_guess: Option<FitGuessFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputFile {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub prefix: String,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputFile {
    fn default() -> Self {
        Self { dir: default_out_dir(), prefix: String::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: String,
    pub trap: TrapFile,
    pub sequence: SequenceFile,
    #[serde(default)]
    pub sim: SimOptions,
    #[serde(default)]
    pub readout: ReadoutModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanFile>,
    #[serde(default)]
    pub analysis: AnalysisFile,
    #[serde(default)]
    pub output: OutputFile,
}

impl RunConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks every section and reports the first problem as a configuration error.
    pub fn validate(&self) -> Result<()> {
        let cfg = |e: Error| match e {
            Error::Config(m) => Error::Config(m),
            other => Error::Config(other.to_string()),
        };
        self.trap.to_trap_config().map_err(cfg)?;
        self.sim.validate().map_err(cfg)?;
        self.readout.validate().map_err(cfg)?;
        self.force_pulse().map_err(cfg)?;
        self.sequence().and_then(|s| s.validate()).map_err(cfg)?;
        if let Some(scan) = &self.scan {
            if scan.shots == 0 {
                return Err(Error::Config("scan.shots must be ≥ 1".into()));
            }
            match scan.kind {
                ScanKind::Phi => {
                    if scan.theta_rad.is_empty() {
                        return Err(Error::Config("φ scan needs at least one theta_rad value".into()));
                    }
                    if scan.theta_rad.iter().any(|t| !t.is_finite()) {
                        return Err(Error::Config("theta_rad values must be finite".into()));
                    }
                    if scan.phi_points < 5 {
                        return Err(Error::Config("phi_points must be ≥ 5".into()));
                    }
                }
                ScanKind::Tau => {
                    let grid = scan.tau.ok_or_else(|| Error::Config("τ scan needs scan.tau".into()))?;
                    let taus = grid.values_s();
                    if taus.is_empty() || taus.iter().any(|t| !(*t >= 0.0)) || taus.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(Error::Config("scan.tau must give strictly increasing values ≥ 0".into()));
                    }
                    if matches!(self.sequence, SequenceFile::Inline { .. }) {
                        return Err(Error::Config("τ scans need an echo sequence".into()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn trap_config(&self) -> Result<TrapConfig> {
        self.trap.to_trap_config()
    }

    /// Force-pulse parameters of an echo sequence (`None` for inline programs).
    pub fn force_pulse(&self) -> Result<Option<ForcePulseParams>> {
        let SequenceFile::Echo { delta_hz, omega_f_hz, tau_us, delta_c_hz, .. } = &self.sequence else {
            return Ok(None);
        };
        let trap = self.trap_config()?;
        let delta = TAU * delta_hz;
        if delta == 0.0 || !delta.is_finite() {
            return Err(Error::Config("sequence.delta_hz must be finite and non-zero".into()));
        }
        let omega_f = match omega_f_hz {
            Some(f) => TAU * f,
            None => trap.derive()?.omega_f,
        };
        let delta_c = match delta_c_hz {
            Some(f) => TAU * f,
            None => {
                let (_, omega_s) = mode_frequencies(trap.omega_c);
                carrier_light_shift(trap.carrier_rabi, trap.omega_0, omega_s + delta)?
            }
        };
        let tau = match tau_us {
            Some(t) => t * 1e-6,
            None => TAU / delta.abs(),
        };
        let p = ForcePulseParams { omega_f, delta, delta_c, tau };
        p.validate()?;
        Ok(Some(p))
    }

    /// The program with the force-pulse duration replaced by `tau` (echo sequences only).
    pub fn sequence_with_tau(&self, tau: Option<f64>) -> Result<PulseSequence> {
        match &self.sequence {
            SequenceFile::Inline { ops } => Ok(ops.clone()),
            SequenceFile::Echo { echo, frame_tracking, .. } => {
                let mut p = self.force_pulse()?.expect("echo sequences have force pulses");
                if let Some(t) = tau {
                    p = p.with_tau(t);
                }
                let final_phi = if *frame_tracking { p.phi1() } else { 0.0 };
                Ok(build_echo_sequence_with_phase(*echo, p, final_phi))
            }
        }
    }

    pub fn sequence(&self) -> Result<PulseSequence> {
        self.sequence_with_tau(None)
    }

    pub fn sequence_id(&self) -> String {
        match &self.sequence {
            SequenceFile::Echo { echo, .. } => echo.name().to_string(),
            SequenceFile::Inline { .. } => "inline".to_string(),
        }
    }

    pub fn scan_file(&self) -> Result<&ScanFile> {
        self.scan.as_ref().ok_or_else(|| Error::Config("configuration has no scan section".into()))
    }

    pub fn scan_spec(&self) -> Result<ScanSpec> {
        let scan = self.scan_file()?;
        Ok(ScanSpec {
            shots: scan.shots,
            seed: scan.seed,
            readout: self.readout,
            sim: self.sim,
            exact: scan.exact,
            resolved: scan.resolved,
            sequence_id: self.sequence_id(),
        })
    }

    pub fn phis(&self) -> Result<Vec<f64>> {
        Ok(uniform_phis(self.scan_file()?.phi_points))
    }

    /// Fit starting point: the configured guess, else the simulation truth.
    pub fn fit_guess(&self) -> Result<EchoModelParams> {
        if let Some(g) = self.analysis.fit_guess {
            return Ok(g.to_params());
        }
        let p = self
            .force_pulse()?
            .ok_or_else(|| Error::Config("model fit needs an echo sequence or analysis.fit_guess".into()))?;
        Ok(EchoModelParams { gamma: self.sim.gamma, delta: p.delta, omega_f: p.omega_f, delta_c: p.delta_c })
    }

    /// Readout model used by the analysis, if correction is enabled.
    pub fn analysis_readout(&self) -> Option<ReadoutModel> {
        self.analysis.correct_readout.then_some(self.readout)
    }
}

/// `θ` values given as fractions of π.
pub fn thetas_from_pi(fractions: &[f64]) -> Vec<f64> {
    fractions.iter().map(|f| f * PI).collect()
}
