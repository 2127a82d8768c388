use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use super::harmonics::{discrete_harmonics, fit_harmonics, point_probabilities};
use crate::error::{Error, Result};
use crate::measurement::{outcome_probs, parity_signal, ReadoutModel, ScanData};
use crate::quantum_core::{bell_state, collective_rotate, Rotation};

/// Largest allowed distance of the analysis angle from `π/2`.
pub const THETA_WINDOW: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityBound {
    pub theta: f64,
    /// `√(d² + e²)` of the parity series.
    pub amplitude: f64,
    /// Parity `2φ` amplitude per unit `2|C|` at this θ (1 at `π/2`).
    pub sensitivity: f64,
    pub abs_c: f64,
    /// `2|C|`.
    pub f_lower_bound: f64,
    /// Parity harmonics `a..e`.
    pub coeffs: [f64; 5],
    pub std_err: [f64; 5],
    pub readout_corrected: bool,
}

/// `2φ` amplitude of the parity of `R(θ,φ)⊗R(θ,φ) |E(0)⟩`, by conjugation on
/// an 8-point grid. Equals `sin²θ`.
pub fn parity_sensitivity(theta: f64) -> f64 {
    let bell = bell_state(0.0);
    let samples: Vec<f64> = (0..8)
        .map(|k| parity_signal(&outcome_probs(&collective_rotate(&bell, Rotation { theta, phi: TAU * k as f64 / 8.0 }))))
        .collect();
    let h = discrete_harmonics(&samples);
    h[3].hypot(h[4])
}

/// `|C|` and the bound `F ≥ 2|C|` from the `2φ` component of the parity of a
/// single-θ φ scan.
pub fn coherence_from_parity(scan: &ScanData, readout: Option<&ReadoutModel>) -> Result<ParityBound> {
    let theta = match scan.thetas().as_slice() {
        [t] => *t,
        _ => return Err(Error::InputMismatch("parity analysis needs a φ scan at one θ".into())),
    };
    if (theta - FRAC_PI_2).abs() > THETA_WINDOW {
        return Err(Error::ContractViolation(format!(
            "analysis angle {theta:.4} rad is more than {THETA_WINDOW} rad from π/2"
        )));
    }
    let phis: Vec<f64> = scan.records.iter().filter_map(|r| r.phi()).collect();
    let probs = point_probabilities(scan, readout, false);
    let parity: Vec<f64> = probs.iter().map(|p| p[0] + p[3] - p[1] - p[2]).collect();
    let var: Vec<f64> = if scan.is_exact() {
        vec![0.0; parity.len()]
    } else {
        // multinomial variance of p_uu + p_dd − p_mid = 1 − 2 p_mid
        probs
            .iter()
            .zip(&scan.records)
            .map(|(p, r)| {
                let mid = (p[1] + p[2]).clamp(0.0, 1.0);
                4.0 * mid * (1.0 - mid) / r.n_shots as f64
            })
            .collect()
    };
    let (coeffs, std_err, _) = fit_harmonics(&phis, &parity, &var)?;
    let amplitude = coeffs[3].hypot(coeffs[4]);
    let sensitivity = parity_sensitivity(theta);
    let f_lower_bound = amplitude / sensitivity;
    Ok(ParityBound {
        theta,
        amplitude,
        sensitivity,
        abs_c: f_lower_bound / 2.0,
        f_lower_bound,
        coeffs,
        std_err,
        readout_corrected: readout.is_some_and(|m| !m.is_ideal_readout()),
    })
}
