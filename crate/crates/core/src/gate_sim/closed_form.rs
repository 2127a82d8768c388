//! Closed-form populations after the single-force-pulse echo.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::trap_physics::displacement_trajectory;

/// Parameters of the closed-form model; rates in s⁻¹, frequencies in rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EchoModelParams {
    #[serde(rename = "gamma_s_inv")]
    pub gamma: f64,
    #[serde(rename = "delta_rad_s")]
    pub delta: f64,
    #[serde(rename = "omega_f_rad_s")]
    pub omega_f: f64,
    #[serde(rename = "delta_c_rad_s")]
    pub delta_c: f64,
}

impl EchoModelParams {
    pub fn populations(&self, tau: f64, nbar: f64, thermal_factor: bool) -> Result<(f64, f64)> {
        model_populations_eq4(tau, self.gamma, self.delta, self.omega_f, self.delta_c, nbar, thermal_factor)
    }
}

/// `(P(↑↑), P(↑↓) + P(↓↑))` after `π/2 - W(τ) - π - π/2`:
///
/// ```text
/// P(↑↑) = A − ½ e^{−Γτ − |α|²/2} cos Ψ(τ) cos(Δ_c τ)
/// P_mid = 1 − 2A,   A = ¼ + e^{−2Γτ}[cos(2Δ_c τ) + e^{−2|α|²}]/8
/// ```
///
/// With `thermal_factor` every `|α|²` is multiplied by `2n̄ + 1`.
pub fn model_populations_eq4(
    tau: f64,
    gamma: f64,
    delta: f64,
    omega_f: f64,
    delta_c: f64,
    nbar: f64,
    thermal_factor: bool,
) -> Result<(f64, f64)> {
    let (alpha, psi) = displacement_trajectory(omega_f, delta, tau)?;
    let scale = if thermal_factor { 2.0 * nbar + 1.0 } else { 1.0 };
    let a2 = alpha.norm_sqr() * scale;
    let gt = gamma * tau;
    let big_a = 0.25 + (-2.0 * gt).exp() * ((2.0 * delta_c * tau).cos() + (-2.0 * a2).exp()) / 8.0;
    let p_uu = big_a - 0.5 * (-gt - a2 / 2.0).exp() * psi.cos() * (delta_c * tau).cos();
    Ok((p_uu.clamp(0.0, 1.0), (1.0 - 2.0 * big_a).clamp(0.0, 1.0)))
}
