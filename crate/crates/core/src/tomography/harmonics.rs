use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, Matrix3, Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{ReadoutModel, ScanData};

/// Measured quantity whose `φ` dependence is fitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Uu,
    /// `P(↑↓) + P(↓↑)`.
    Mid,
    Ud,
    Du,
}

impl Channel {
    /// Value from resolved probabilities `(uu, ud, du, dd)`.
    pub fn of(self, p: &[f64; 4]) -> f64 {
        match self {
            Self::Uu => p[0],
            Self::Mid => p[1] + p[2],
            Self::Ud => p[1],
            Self::Du => p[2],
        }
    }
}

/// Which channels enter the inversion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelSet {
    /// `(uu, mid)`: ions not individually resolved.
    Pooled,
    /// `(uu, ud, du)`: each ion read out separately.
    Resolved,
}

impl ChannelSet {
    pub fn channels(self) -> &'static [Channel] {
        match self {
            Self::Pooled => &[Channel::Uu, Channel::Mid],
            Self::Resolved => &[Channel::Uu, Channel::Ud, Channel::Du],
        }
    }
}

/// `[1, cos φ, sin φ, cos 2φ, sin 2φ]`, the terms multiplying `a, b, c, d, e`.
pub fn harmonic_basis(phi: f64) -> [f64; 5] {
    [1.0, phi.cos(), phi.sin(), (2.0 * phi).cos(), (2.0 * phi).sin()]
}

/// `a, b, c, d, e` of a signal sampled on the uniform grid `φ_k = 2πk/n`
/// (exact when the signal has no harmonic above `n/2 − 1`).
pub fn discrete_harmonics(samples: &[f64]) -> [f64; 5] {
    let n = samples.len() as f64;
    let mut out = [0.0; 5];
    for (k, &v) in samples.iter().enumerate() {
        let h = harmonic_basis(TAU * k as f64 / n);
        out[0] += v / n;
        for m in 1..5 {
            out[m] += 2.0 * v * h[m] / n;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelFit {
    pub channel: Channel,
    /// `a, b, c, d, e`.
    pub coeffs: [f64; 5],
    pub std_err: [f64; 5],
    pub residual_rms: f64,
}

impl ChannelFit {
    pub fn model(&self, phi: f64) -> f64 {
        harmonic_basis(phi).iter().zip(&self.coeffs).map(|(h, c)| h * c).sum()
    }

    /// `√(d² + e²)`.
    pub fn second_harmonic_amplitude(&self) -> f64 {
        self.coeffs[3].hypot(self.coeffs[4])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicFit {
    pub theta: f64,
    pub channels: Vec<ChannelFit>,
    pub n_points: usize,
}

impl HarmonicFit {
    pub fn channel(&self, c: Channel) -> Option<&ChannelFit> {
        self.channels.iter().find(|f| f.channel == c)
    }
}

/// Least-squares fit of `a + b cos φ + c sin φ + d cos 2φ + e sin 2φ`.
///
/// Returns coefficients, standard errors from the per-point variances and the
/// residual RMS. Fewer than five distinct angles, or angles that do not
/// separate the five terms, give [`Error::InsufficientData`].
pub fn fit_harmonics(phis: &[f64], values: &[f64], variances: &[f64]) -> Result<([f64; 5], [f64; 5], f64)> {
    let n = phis.len();
    let mut distinct: Vec<f64> = phis.iter().map(|p| p.rem_euclid(TAU)).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if distinct.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} distinct φ values; at least 5 are needed for harmonics up to 2φ",
            distinct.len()
        )));
    }
    let a = DMatrix::from_fn(n, 5, |i, j| harmonic_basis(phis[i])[j]);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-10 * smax {
        return Err(Error::InsufficientData("φ values do not separate the harmonic terms".into()));
    }
    let pinv = svd
        .pseudo_inverse(0.0)
        .map_err(|e| Error::NumericalFailure(format!("pseudo-inverse: {e}")))?;
    let y = DVector::from_column_slice(values);
    let coef = &pinv * &y;
    let resid = &a * &coef - &y;
    let mut se = [0.0; 5];
    for (k, s) in se.iter_mut().enumerate() {
        *s = (0..n).map(|i| pinv[(k, i)].powi(2) * variances[i]).sum::<f64>().sqrt();
    }
    let c = [coef[0], coef[1], coef[2], coef[3], coef[4]];
    Ok((c, se, (resid.norm_squared() / n as f64).sqrt()))
}

/// Per-point resolved probabilities `(uu, ud, du, dd)` of a φ scan, with the
/// readout confusion inverted when `readout` is given. For pooled data the
/// middle outcome is split evenly between `ud` and `du`.
pub(crate) fn point_probabilities(scan: &ScanData, readout: Option<&ReadoutModel>, resolved: bool) -> Vec<[f64; 4]> {
    scan.records
        .iter()
        .map(|r| {
            let p = match (resolved, r.resolved_frequencies()) {
                (true, Some(p)) => p,
                _ => {
                    let f = r.frequencies();
                    [f.p_uu, 0.5 * f.p_mid, 0.5 * f.p_mid, f.p_dd]
                }
            };
            match readout {
                Some(m) if !m.is_ideal_readout() => correct_readout(&p, m, resolved),
                _ => p,
            }
        })
        .collect()
}

fn correct_readout(p: &[f64; 4], m: &ReadoutModel, resolved: bool) -> [f64; 4] {
    if resolved {
        let inv = m.confusion4().try_inverse().unwrap_or_else(Matrix4::identity);
        let v = inv * Vector4::from(*p);
        [v[0], v[1], v[2], v[3]]
    } else {
        let inv = m.confusion3().try_inverse().unwrap_or_else(Matrix3::identity);
        let v = inv * Vector3::new(p[0], p[1] + p[2], p[3]);
        [v[0], 0.5 * v[1], 0.5 * v[1], v[2]]
    }
}

/// Harmonic fit of each channel of a single-θ φ scan.
///
/// Points are weighted uniformly: the binomial variance `p(1−p)/N` never exceeds
/// the `1/(4N)` floor, so floored binomial weights are all equal. Standard
/// errors use the unfloored variance of the fitted probabilities.
pub fn fit_phi_harmonics(scan: &ScanData, set: ChannelSet, readout: Option<&ReadoutModel>) -> Result<HarmonicFit> {
    let thetas = scan.thetas();
    let theta = match thetas.as_slice() {
        [t] => *t,
        [] => return Err(Error::InputMismatch("harmonic fit needs a φ scan".into())),
        _ => return Err(Error::InputMismatch(format!("φ scan mixes {} θ values", thetas.len()))),
    };
    let resolved = set == ChannelSet::Resolved;
    if resolved && !scan.has_resolved_counts() {
        return Err(Error::InputMismatch("resolved channels requested but scan pools ↑↓ and ↓↑".into()));
    }
    let phis: Vec<f64> = scan.records.iter().filter_map(|r| r.phi()).collect();
    let probs = point_probabilities(scan, readout, resolved);
    let exact = scan.is_exact();
    let mut channels = Vec::new();
    for &ch in set.channels() {
        let values: Vec<f64> = probs.iter().map(|p| ch.of(p)).collect();
        let var: Vec<f64> = if exact {
            vec![0.0; values.len()]
        } else {
            values
                .iter()
                .zip(&scan.records)
                .map(|(v, r)| {
                    let p = v.clamp(0.0, 1.0);
                    p * (1.0 - p) / r.n_shots as f64
                })
                .collect()
        };
        let (coeffs, std_err, residual_rms) = fit_harmonics(&phis, &values, &var)?;
        channels.push(ChannelFit { channel: ch, coeffs, std_err, residual_rms });
    }
    Ok(HarmonicFit { theta, channels, n_points: phis.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_sum_matches_least_squares_on_uniform_grid() {
        let phis: Vec<f64> = (0..12).map(|k| TAU * k as f64 / 12.0).collect();
        let truth = [0.3, 0.1, -0.05, 0.2, 0.07];
        let vals: Vec<f64> = phis
            .iter()
            .map(|&p| harmonic_basis(p).iter().zip(&truth).map(|(h, c)| h * c).sum())
            .collect();
        let (c, _, rms) = fit_harmonics(&phis, &vals, &vec![0.0; 12]).unwrap();
        let d = discrete_harmonics(&vals);
        for k in 0..5 {
            assert!((c[k] - truth[k]).abs() < 1e-12 && (d[k] - truth[k]).abs() < 1e-12);
        }
        assert!(rms < 1e-14);
    }

    #[test]
    fn orthogonal_normal_matrix() {
        let n = 36;
        let a = DMatrix::from_fn(n, 5, |i, j| harmonic_basis(TAU * i as f64 / n as f64)[j]);
        let g = a.transpose() * a;
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert!(g[(i, j)].abs() < 1e-12 * n as f64);
                }
            }
        }
    }

    #[test]
    fn too_few_angles() {
        let phis = [0.0, 1.0, 2.0, 3.0, 0.0, 1.0];
        assert!(matches!(fit_harmonics(&phis, &[0.0; 6], &[0.0; 6]), Err(Error::InsufficientData(_))));
    }
}
