use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate_sim::{model_populations_eq4, EchoModelParams};
use crate::lm::{levenberg_marquardt, numeric_jacobian, LmOptions};
use crate::measurement::{ReadoutModel, ScanData};
use crate::trap_physics::{force_phase_for_rabi, TrapConfig};

pub const PARAM_NAMES: [&str; 4] = ["gamma_s_inv", "delta_rad_s", "omega_f_rad_s", "delta_c_rad_s"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EchoModelFitOptions {
    /// Readout confusion folded into the model predictions.
    pub readout: Option<ReadoutModel>,
    pub nbar: f64,
    pub include_thermal_coherence_factor: bool,
    pub max_iter: usize,
    pub rel_tol: f64,
}

impl Default for EchoModelFitOptions {
    fn default() -> Self {
        Self { readout: None, nbar: 0.0, include_thermal_coherence_factor: false, max_iter: 500, rel_tol: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EchoModelFit {
    pub params: EchoModelParams,
    /// Order as [`PARAM_NAMES`].
    pub std_err: [f64; 4],
    pub covariance: [[f64; 4]; 4],
    /// `Σ r²` with residuals in units of the binomial scale `1/(2√N)`.
    pub cost: f64,
    pub reduced_chi2: f64,
    pub iterations: usize,
    pub n_points: usize,
}

impl EchoModelFit {
    /// Force phase angle `Δφ` implied by the fitted `Ω_f` at the geometry and carrier Rabi frequency of `trap`.
    pub fn delta_phi(&self, trap: &TrapConfig) -> Result<f64> {
        let geo = trap.derive()?;
        force_phase_for_rabi(self.params.omega_f, geo.eta, trap.carrier_rabi, trap.theta_a)
    }
}

fn to_vec(p: &EchoModelParams) -> [f64; 4] {
    [p.gamma, p.delta, p.omega_f, p.delta_c]
}

fn from_slice(v: &[f64]) -> EchoModelParams {
    EchoModelParams { gamma: v[0], delta: v[1], omega_f: v[2], delta_c: v[3] }
}

/// Fallback scales for parameters guessed as zero.
const ZERO_GUESS_SCALE: [f64; 4] = [1e3, 1e4, 1e4, 1e3];
/// Starting value of `u` for a zero guess; `u = 0` is a stationary point of `p = s u²`.
const ZERO_GUESS_U: f64 = 0.1;

/// Fits `(Γ, δ, Ω_f, Δ_c)` of the closed-form populations to a τ scan.
///
/// Each parameter is written `p = s u²` with `s` the magnitude of the initial
/// guess, so all stay non-negative. Residuals of both channels are scaled by
/// `2√N` (the inverse of the largest binomial standard deviation). The
/// covariance is `(JᵀJ)⁻¹ · χ²_red` with `J` the Jacobian in the natural
/// parameters at the optimum.
pub fn fit_eq4(scan: &ScanData, guess: &EchoModelParams, opts: &EchoModelFitOptions) -> Result<EchoModelFit> {
    let points: Vec<(f64, f64, f64, f64)> = scan
        .records
        .iter()
        .map(|r| {
            let tau = r.tau().ok_or_else(|| Error::InputMismatch("model fit needs a τ scan".into()))?;
            let f = r.frequencies();
            Ok((tau, f.p_uu, f.p_mid, 2.0 * (r.n_shots as f64).sqrt()))
        })
        .collect::<Result<_>>()?;
    if points.len() < 16 {
        return Err(Error::InsufficientData(format!("{} τ points; at least 16 are needed", points.len())));
    }
    if guess.delta == 0.0 {
        return Err(Error::SingularInput("initial δ must be non-zero".into()));
    }
    let span = points.last().unwrap().0 - points[0].0;
    let period = std::f64::consts::TAU / guess.delta.abs();
    if span < period {
        return Err(Error::InsufficientData(format!("τ span {span:e} s shorter than one loop period {period:e} s")));
    }
    let confusion = opts.readout.map(|m| m.confusion3()).unwrap_or_else(Matrix3::identity);
    let thermal = opts.include_thermal_coherence_factor;
    let nbar = opts.nbar;
    let residuals = |p: &[f64]| -> Result<DVector<f64>> {
        let mut out = Vec::with_capacity(2 * points.len());
        for &(tau, uu, mid, w) in &points {
            let (m_uu, m_mid) = model_populations_eq4(tau, p[0], p[1], p[2], p[3], nbar, thermal)?;
            let obs = confusion * Vector3::new(m_uu, m_mid, 1.0 - m_uu - m_mid);
            out.push(w * (obs[0] - uu));
            out.push(w * (obs[1] - mid));
        }
        Ok(DVector::from_vec(out))
    };

    let g = to_vec(guess).map(f64::abs);
    let scale: Vec<f64> = g.iter().zip(ZERO_GUESS_SCALE).map(|(&v, z)| if v > 0.0 { v } else { z }).collect();
    let u0: Vec<f64> = g.iter().zip(&scale).map(|(&v, s)| if v > 0.0 { (v / s).sqrt() } else { ZERO_GUESS_U }).collect();
    let natural = |u: &DVector<f64>| -> Vec<f64> { u.iter().zip(&scale).map(|(x, s)| s * x * x).collect() };
    let lm_opts = LmOptions { max_iter: opts.max_iter, rel_tol: opts.rel_tol, ..LmOptions::default() };
    let res = levenberg_marquardt(|u: &DVector<f64>| residuals(&natural(u)), DVector::from_vec(u0), &lm_opts)?;

    let p = natural(&res.params);
    let pv = DVector::from_vec(p.clone());
    let jac: DMatrix<f64> = numeric_jacobian(&|x: &DVector<f64>| residuals(x.as_slice()), &pv, 1e-7)?;
    let dof = (res.residuals.len() as f64 - 4.0).max(1.0);
    let reduced_chi2 = res.cost / dof;
    let cov = (jac.transpose() * &jac)
        .pseudo_inverse(1e-300)
        .map_err(|e| Error::NumericalFailure(format!("covariance: {e}")))?
        * reduced_chi2;
    let mut covariance = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            covariance[i][j] = cov[(i, j)];
        }
    }
    Ok(EchoModelFit {
        params: from_slice(&p),
        std_err: [0, 1, 2, 3].map(|i| cov[(i, i)].max(0.0).sqrt()),
        covariance,
        cost: res.cost,
        reduced_chi2,
        iterations: res.iterations,
        n_points: points.len(),
    })
}
