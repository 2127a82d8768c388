use nalgebra::{Matrix2, Matrix3, Matrix3x4, Matrix4, Matrix4x3, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum_core::{DensityMatrix, DD, DU, UD, UU};

/// Probabilities of (both ↑, one of each, both ↓).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeProbs {
    pub p_uu: f64,
    pub p_mid: f64,
    pub p_dd: f64,
}

impl OutcomeProbs {
    pub fn new(p_uu: f64, p_mid: f64, p_dd: f64) -> Result<Self> {
        let p = Self { p_uu, p_mid, p_dd };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.as_array();
        if v.iter().any(|x| !(-1e-12..=1.0 + 1e-12).contains(x)) || (v.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::ContractViolation(format!("invalid outcome probabilities {v:?}")));
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.p_uu, self.p_mid, self.p_dd]
    }

    fn from_vector(v: Vector3<f64>) -> Self {
        Self { p_uu: v[0], p_mid: v[1], p_dd: v[2] }
    }
}

/// Probabilities of the four individually resolved outcomes `(↑↑, ↑↓, ↓↑, ↓↓)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedProbs(pub [f64; 4]);

impl ResolvedProbs {
    pub fn pooled(&self) -> OutcomeProbs {
        let p = self.0;
        OutcomeProbs { p_uu: p[UU], p_mid: p[UD] + p[DU], p_dd: p[DD] }
    }
}

/// Diagonal of `ρ` pooled into three outcomes.
pub fn outcome_probs(rho: &DensityMatrix) -> OutcomeProbs {
    resolved_probs(rho).pooled()
}

pub fn resolved_probs(rho: &DensityMatrix) -> ResolvedProbs {
    let p = rho.populations().map(|x| x.clamp(0.0, 1.0));
    let s: f64 = p.iter().sum();
    ResolvedProbs(p.map(|x| x / s))
}

/// `Π = p_uu + p_dd − p_mid`.
pub fn parity_signal(probs: &OutcomeProbs) -> f64 {
    probs.p_uu + probs.p_dd - probs.p_mid
}

/// Preparation and readout imperfections, applied independently to each qubit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutModel {
    /// Probability that a qubit is prepared in `|↓⟩`.
    pub p_prep: f64,
    /// Probability that a `|↓⟩` qubit is read as `↑`.
    pub eps_bright: f64,
    /// Probability that an `|↑⟩` qubit is read as `↓`.
    pub eps_dark: f64,
}

impl Default for ReadoutModel {
    fn default() -> Self {
        Self { p_prep: 0.99, eps_bright: 0.05, eps_dark: 0.05 }
    }
}

impl ReadoutModel {
    pub const IDEAL: Self = Self { p_prep: 1.0, eps_bright: 0.0, eps_dark: 0.0 };

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p_prep", self.p_prep), ("eps_bright", self.eps_bright), ("eps_dark", self.eps_dark)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::ContractViolation(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Single-qubit confusion matrix, columns = true (↑, ↓), rows = observed.
    pub fn qubit_confusion(&self) -> Matrix2<f64> {
        Matrix2::new(1.0 - self.eps_dark, self.eps_bright, self.eps_dark, 1.0 - self.eps_bright)
    }

    /// Column-stochastic confusion matrix on the resolved outcomes.
    pub fn confusion4(&self) -> Matrix4<f64> {
        let m = self.qubit_confusion();
        m.kronecker(&m)
    }

    /// Column-stochastic confusion matrix on `(uu, mid, dd)`.
    pub fn confusion3(&self) -> Matrix3<f64> {
        let m4 = self.confusion4();
        let pool = Matrix3x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        // one-each input: either ordering pools to the same column
        let spread = Matrix4x3::from_columns(&[
            Vector4::new(1.0, 0.0, 0.0, 0.0),
            Vector4::new(0.0, 0.5, 0.5, 0.0),
            Vector4::new(0.0, 0.0, 0.0, 1.0),
        ]);
        pool * m4 * spread
    }

    pub fn is_ideal_readout(&self) -> bool {
        self.eps_bright == 0.0 && self.eps_dark == 0.0
    }
}

pub fn apply_readout_errors(probs: &OutcomeProbs, model: &ReadoutModel) -> OutcomeProbs {
    let v = Vector3::from(probs.as_array());
    OutcomeProbs::from_vector(model.confusion3() * v)
}

pub fn apply_readout_errors_resolved(probs: &ResolvedProbs, model: &ReadoutModel) -> ResolvedProbs {
    let v = model.confusion4() * Vector4::from(probs.0);
    ResolvedProbs([v[0], v[1], v[2], v[3]])
}

/// `Π_k [(1−q)·id + q·flip_k] (|↓↓⟩⟨↓↓|)` with `q = 1 − p_prep`.
pub fn preparation_state(p_prep: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p_prep) {
        return Err(Error::ContractViolation(format!("p_prep = {p_prep} outside [0, 1]")));
    }
    let q = 1.0 - p_prep;
    let single = [q, 1.0 - q];
    let mut pops = [0.0; 4];
    for (k, p) in pops.iter_mut().enumerate() {
        *p = single[k >> 1] * single[k & 1];
    }
    let mut entries = [[num_complex::Complex64::new(0.0, 0.0); 4]; 4];
    for k in 0..4 {
        entries[k][k] = num_complex::Complex64::new(pops[k], 0.0);
    }
    DensityMatrix::from_entries(entries)
}

/// `θ = Ω_c (t_pulse − t_dead)`.
pub fn pulse_area_from_duration(omega_c: f64, t_pulse: f64, t_dead: f64) -> Result<f64> {
    if t_pulse < t_dead {
        return Err(Error::InvalidCalibration(format!(
            "pulse length {t_pulse:e} s shorter than dead time {t_dead:e} s"
        )));
    }
    Ok(omega_c * (t_pulse - t_dead))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum_core::bell_state;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn pooled_outcomes() {
        assert_eq!(outcome_probs(&bell_state(0.3)).as_array(), [0.5, 0.0, 0.5]);
        let mm = outcome_probs(&DensityMatrix::maximally_mixed()).as_array();
        assert!((mm[1] - 0.5).abs() < 1e-15 && (mm[0] - 0.25).abs() < 1e-15);
        assert_eq!(outcome_probs(&DensityMatrix::basis(UD)).as_array(), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn readout_composition() {
        let p = OutcomeProbs::new(1.0, 0.0, 0.0).unwrap();
        let m = ReadoutModel { p_prep: 1.0, eps_bright: 0.0, eps_dark: 0.1 };
        let out = apply_readout_errors(&p, &m).as_array();
        for (a, b) in out.iter().zip([0.81, 0.18, 0.01]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(ReadoutModel::IDEAL.confusion3(), Matrix3::identity());
        let sym = ReadoutModel { p_prep: 1.0, eps_bright: 0.07, eps_dark: 0.07 };
        let u = apply_readout_errors(&OutcomeProbs::new(0.25, 0.5, 0.25).unwrap(), &sym).as_array();
        assert!((u[0] - 0.25).abs() < 1e-15 && (u[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn confusion_column_stochastic() {
        let m = ReadoutModel { p_prep: 1.0, eps_bright: 0.13, eps_dark: 0.02 };
        for c in m.confusion3().column_iter() {
            assert!((c.sum() - 1.0).abs() < 1e-15);
        }
        for c in m.confusion4().column_iter() {
            assert!((c.sum() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn preparation() {
        assert_eq!(preparation_state(1.0).unwrap(), DensityMatrix::basis(DD));
        assert!((preparation_state(0.99).unwrap().populations()[DD] - 0.9801).abs() < 1e-15);
        assert_eq!(preparation_state(0.0).unwrap(), DensityMatrix::basis(UU));
    }

    #[test]
    fn parity() {
        assert_eq!(parity_signal(&OutcomeProbs::new(0.5, 0.0, 0.5).unwrap()), 1.0);
        assert_eq!(parity_signal(&OutcomeProbs::new(0.0, 1.0, 0.0).unwrap()), -1.0);
        assert_eq!(parity_signal(&OutcomeProbs::new(0.25, 0.5, 0.25).unwrap()), 0.0);
    }

    #[test]
    fn pulse_area() {
        assert_eq!(pulse_area_from_duration(1.0, 0.1e-6, 0.1e-6).unwrap(), 0.0);
        let th = pulse_area_from_duration(TAU * 100e3, 2.8e-6, 0.1e-6).unwrap();
        assert!((th - 1.6965).abs() < 1e-4 && (th / PI - 0.54).abs() < 1e-12);
        assert!(matches!(pulse_area_from_duration(1.0, 0.0, 0.1e-6), Err(Error::InvalidCalibration(_))));
    }
}
