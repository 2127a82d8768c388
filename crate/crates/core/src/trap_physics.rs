//! Calibration formulas from trap and beam geometry to gate parameters.
//!
//! Every frequency is angular (rad/s) and every length is in metres. The
//! configuration layer converts cyclic on-disk values on ingestion.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HBAR: f64 = 1.054571817e-34;
pub const EPSILON_0: f64 = 8.8541878128e-12;
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
pub const ATOMIC_MASS_UNIT: f64 = 1.66053907e-27;
pub const CA40_MASS_U: f64 = 39.962591;
pub const CA40_MASS: f64 = CA40_MASS_U * ATOMIC_MASS_UNIT;
pub const DEFAULT_WAVELENGTH: f64 = 397.0e-9;

/// Light-shift formula validity margin: `|ω_0 ± ω| > 10 Ω_c`.
pub const PERTURBATIVE_MARGIN: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    /// COM axial mode (rad/s).
    pub omega_c: f64,
    /// Mass of one ion (kg).
    pub ion_mass: f64,
    /// Raman wavelength (m).
    pub lambda: f64,
    /// Angle between beams A and B (rad).
    pub theta_l: f64,
    /// Angle between beam A and the quantization axis (rad).
    pub theta_a: f64,
    /// Beam-A polarization angle from vertical (rad).
    pub beta: f64,
    /// Zeeman splitting (rad/s).
    pub omega_0: f64,
    /// Carrier Raman Rabi frequency Ω_c (rad/s).
    pub carrier_rabi: f64,
}

impl TrapConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_c", self.omega_c),
            ("ion_mass", self.ion_mass),
            ("lambda", self.lambda),
            ("omega_0", self.omega_0),
            ("carrier_rabi", self.carrier_rabi),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be finite and positive, got {v}")));
            }
        }
        for (name, v) in [("theta_l", self.theta_l), ("theta_a", self.theta_a), ("beta", self.beta)] {
            if !(v.is_finite() && v > 0.0 && v < PI) {
                return Err(Error::Config(format!("{name} must lie in (0, π), got {v}")));
            }
        }
        Ok(())
    }

    pub fn derive(&self) -> Result<DerivedGeometry> {
        DerivedGeometry::from_config(self)
    }
}

/// Quantities derived from a [`TrapConfig`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedGeometry {
    pub delta_k: f64,
    pub omega_s: f64,
    pub z0s: f64,
    pub eta: f64,
    pub d: f64,
    pub p_real: f64,
    pub delta_phi: f64,
    pub omega_s_rabi: f64,
    pub omega_f: f64,
}

impl DerivedGeometry {
    pub fn from_config(cfg: &TrapConfig) -> Result<Self> {
        cfg.validate()?;
        let dk = delta_k(cfg.lambda, cfg.theta_l);
        let (_, omega_s) = mode_frequencies(cfg.omega_c);
        let z0s = ground_state_size(cfg.ion_mass, omega_s);
        let eta = lamb_dicke(dk, z0s);
        let d = ion_separation(cfg.ion_mass, cfg.omega_c);
        let delta_phi = force_phase_angle(cfg.theta_a, cfg.beta)?;
        let omega_s_rabi = sigma_rabi(cfg.carrier_rabi, cfg.theta_a, delta_phi)?;
        Ok(Self {
            delta_k: dk,
            omega_s,
            z0s,
            eta,
            d,
            p_real: standing_wave_integer(dk, d),
            delta_phi,
            omega_s_rabi,
            omega_f: force_rabi(eta, omega_s_rabi, delta_phi),
        })
    }

    /// Rows of `(name, value, unit)` for reports.
    pub fn table(&self) -> Vec<(&'static str, f64, &'static str)> {
        vec![
            ("delta_k", self.delta_k, "1/m"),
            ("omega_s/2pi", self.omega_s / TAU, "Hz"),
            ("z0s", self.z0s, "m"),
            ("eta", self.eta, "1"),
            ("d", self.d, "m"),
            ("p", self.p_real, "1"),
            ("delta_phi", self.delta_phi, "rad"),
            ("Omega_s/2pi", self.omega_s_rabi / TAU, "Hz"),
            ("Omega_f/2pi", self.omega_f / TAU, "Hz"),
        ]
    }
}

/// Force pulse parameters, all angular frequencies in rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForcePulseParams {
    #[serde(rename = "omega_f_rad_s")]
    pub omega_f: f64,
    /// Detuning from the stretch mode, `ω − ω_s`.
    #[serde(rename = "delta_rad_s")]
    pub delta: f64,
    /// Carrier light shift.
    #[serde(rename = "delta_c_rad_s")]
    pub delta_c: f64,
    #[serde(rename = "tau_s")]
    pub tau: f64,
}

impl ForcePulseParams {
    pub fn validate(&self) -> Result<()> {
        if self.delta == 0.0 || !self.delta.is_finite() {
            return Err(Error::SingularInput("force detuning δ must be non-zero".into()));
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::ContractViolation(format!("pulse duration {} < 0", self.tau)));
        }
        if !self.omega_f.is_finite() || !self.delta_c.is_finite() {
            return Err(Error::ContractViolation("non-finite pulse parameter".into()));
        }
        Ok(())
    }

    /// One full phase-space loop, `2π/|δ|`.
    pub fn loop_period(&self) -> f64 {
        TAU / self.delta.abs()
    }

    /// Pulse of `loops` closed loops at the given force and detuning.
    pub fn closed_loops(omega_f: f64, delta: f64, delta_c: f64, loops: u32) -> Self {
        Self { omega_f, delta, delta_c, tau: loops as f64 * TAU / delta.abs() }
    }

    pub fn with_tau(self, tau: f64) -> Self {
        Self { tau, ..self }
    }

    /// Single-qubit light-shift rotation angle `φ_1 = Δ_c τ`.
    pub fn phi1(&self) -> f64 {
        self.delta_c * self.tau
    }
}

/// `Δk = 4π sin(θ_L/2) / λ`.
pub fn delta_k(lambda: f64, theta_l: f64) -> f64 {
    4.0 * PI * (theta_l / 2.0).sin() / lambda
}

/// `(ω_c, ω_s)` with `ω_s = √3 ω_c`.
pub fn mode_frequencies(omega_c: f64) -> (f64, f64) {
    (omega_c, 3f64.sqrt() * omega_c)
}

/// `z_0s = √(ħ / (4 M ω_s))`.
pub fn ground_state_size(mass: f64, omega_s: f64) -> f64 {
    (HBAR / (4.0 * mass * omega_s)).sqrt()
}

pub fn lamb_dicke(delta_k: f64, z0s: f64) -> f64 {
    delta_k * z0s
}

/// Equilibrium separation of two ions of charge `e`,
/// `d = (e² / (2π ε_0 M ω_c²))^{1/3}`.
pub fn ion_separation(mass: f64, omega_c: f64) -> f64 {
    let q2 = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE;
    (q2 / (2.0 * PI * EPSILON_0 * mass * omega_c * omega_c)).cbrt()
}

/// `Δk d / 2π`; the caller judges closeness to an integer.
pub fn standing_wave_integer(delta_k: f64, d: f64) -> f64 {
    delta_k * d / TAU
}

/// `Δφ = 2 atan(1 / (cos θ_A tan β))` on the principal branch `(0, π)`.
pub fn force_phase_angle(theta_a: f64, beta: f64) -> Result<f64> {
    if beta == 0.0 {
        return Err(Error::SingularInput("β = 0 leaves the force phase undefined".into()));
    }
    let denom = theta_a.cos() * beta.tan();
    if denom == 0.0 {
        return Ok(PI);
    }
    let half = (1.0 / denom).atan();
    Ok(2.0 * if half < 0.0 { half + PI } else { half })
}

/// Inverse of [`force_phase_angle`]: the `β ∈ (0, π/2)` giving `delta_phi`.
pub fn beta_for_force_phase(theta_a: f64, delta_phi: f64) -> Result<f64> {
    let t = (delta_phi / 2.0).tan() * theta_a.cos();
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::SingularInput(format!("no β in (0, π/2) gives Δφ = {delta_phi}")));
    }
    Ok((1.0 / t).atan())
}

/// `Ω_s = Ω_c cot θ_A / cos(Δφ/2)`.
pub fn sigma_rabi(carrier_rabi: f64, theta_a: f64, delta_phi: f64) -> Result<f64> {
    let c = (delta_phi / 2.0).cos();
    if c.abs() < 1e-12 {
        return Err(Error::SingularInput("cos(Δφ/2) = 0 in the σ-Rabi formula".into()));
    }
    Ok(carrier_rabi * (theta_a.cos() / theta_a.sin()) / c)
}

/// `Ω_f = 2 η Ω_s sin(Δφ/2)`.
pub fn force_rabi(eta: f64, omega_s_rabi: f64, delta_phi: f64) -> f64 {
    2.0 * eta * omega_s_rabi * (delta_phi / 2.0).sin()
}

/// Carrier Rabi frequency that yields the requested force Rabi frequency.
pub fn carrier_rabi_for_force(omega_f: f64, eta: f64, theta_a: f64, delta_phi: f64) -> Result<f64> {
    let per_unit = force_rabi(eta, sigma_rabi(1.0, theta_a, delta_phi)?, delta_phi);
    if per_unit == 0.0 {
        return Err(Error::SingularInput("geometry produces no differential force".into()));
    }
    Ok(omega_f / per_unit)
}

/// Force phase angle `Δφ = 2 atan(Ω_f / (2 η Ω_c cot θ_A))` reproducing `omega_f`
/// at fixed carrier Rabi frequency.
pub fn force_phase_for_rabi(omega_f: f64, eta: f64, carrier_rabi: f64, theta_a: f64) -> Result<f64> {
    let k = 2.0 * eta * carrier_rabi * theta_a.cos() / theta_a.sin();
    if k == 0.0 || !k.is_finite() {
        return Err(Error::SingularInput("geometry produces no differential force".into()));
    }
    Ok(2.0 * (omega_f / k).atan())
}

/// Off-resonant carrier light shift `Δ_c = (Ω_c²/2)[1/(ω_0+ω) + 1/(ω_0−ω)]`.
pub fn carrier_light_shift(carrier_rabi: f64, omega_0: f64, omega: f64) -> Result<f64> {
    let lim = PERTURBATIVE_MARGIN * carrier_rabi.abs();
    let (plus, minus) = (omega_0 + omega, omega_0 - omega);
    if plus.abs() <= lim || minus.abs() <= lim {
        return Err(Error::PerturbativeRegime(format!(
            "|ω_0 ± ω| = ({:.4e}, {:.4e}) rad/s must exceed {PERTURBATIVE_MARGIN}·Ω_c = {lim:.4e}",
            plus.abs(),
            minus.abs()
        )));
    }
    Ok(0.5 * carrier_rabi * carrier_rabi * (1.0 / plus + 1.0 / minus))
}

/// Geometric phase `Ψ = (π/2)(Ω_f/δ)²` of one closed loop.
pub fn gate_phase(omega_f: f64, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::SingularInput("δ = 0 in gate phase".into()));
    }
    let x = omega_f / delta;
    Ok(FRAC_PI_2 * x * x)
}

/// Displacement `α(τ) = (Ω_f/2δ)(1 − e^{iδτ})` and accumulated phase
/// `Φ(τ) = (Ω_f/2δ)²(δτ − sin δτ)` of the `S = +1` branch.
///
/// Convention: the branch with spin eigenvalue `m` is displaced by `m·α` and
/// picks up `e^{i m² Φ}`.
pub fn displacement_trajectory(omega_f: f64, delta: f64, tau: f64) -> Result<(C64, f64)> {
    if delta == 0.0 {
        return Err(Error::SingularInput("δ = 0 in displacement trajectory".into()));
    }
    let k = omega_f / (2.0 * delta);
    let x = delta * tau;
    let alpha = C64::new(k, 0.0) * (C64::new(1.0, 0.0) - C64::from_polar(1.0, x));
    Ok((alpha, k * k * (x - x.sin())))
}
