use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::harmonics::{discrete_harmonics, ChannelSet, HarmonicFit};
use crate::error::{Error, Result};
use crate::quantum_core::{
    collective_rotation_matrix, non_identity_indices, pauli_compose, pauli_pair, ComplexMatrix, PauliCoefficients,
    Rotation,
};

/// Grid used to extract harmonics by exact conjugation; populations contain no
/// harmonic above `2φ`, so eight points are exact.
const CONJUGATION_GRID: usize = 8;

/// Relative singular-value threshold for the numerical rank.
pub const RANK_TOL: f64 = 1e-10;

/// Maps the 15 non-identity Pauli coefficients to the stacked harmonic
/// coefficients `(a..e)` of every channel at every θ.
#[derive(Clone, Debug, Serialize)]
pub struct DesignMatrix {
    pub thetas: Vec<f64>,
    pub channels: ChannelSet,
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
    /// Contribution of `c_00 = 1/4`, subtracted from the data.
    #[serde(skip)]
    pub offset: DVector<f64>,
    /// Singular values, descending.
    pub svals: Vec<f64>,
    pub rank_tol: f64,
    pub rank: usize,
    /// Orthonormal basis of the unobservable coefficient directions.
    pub null_space: Vec<[f64; 15]>,
    #[serde(skip)]
    v: DMatrix<f64>,
    #[serde(skip)]
    u: DMatrix<f64>,
}

/// Harmonics of every channel's population for input operator `op` at analysis angle `θ`.
fn operator_harmonics(op: &ComplexMatrix, theta: f64, set: ChannelSet) -> Vec<[f64; 5]> {
    let samples: Vec<[f64; 4]> = (0..CONJUGATION_GRID)
        .map(|k| {
            let phi = TAU * k as f64 / CONJUGATION_GRID as f64;
            let u = collective_rotation_matrix(Rotation { theta, phi });
            let out = op.conjugate_by(&u);
            [out[(0, 0)].re, out[(1, 1)].re, out[(2, 2)].re, out[(3, 3)].re]
        })
        .collect();
    set.channels()
        .iter()
        .map(|ch| discrete_harmonics(&samples.iter().map(|p| ch.of(p)).collect::<Vec<_>>()))
        .collect()
}

fn stacked(op: &ComplexMatrix, thetas: &[f64], set: ChannelSet) -> Vec<f64> {
    thetas
        .iter()
        .flat_map(|&t| operator_harmonics(op, t, set))
        .flatten()
        .collect()
}

pub fn build_design_matrix(thetas: &[f64], set: ChannelSet) -> Result<DesignMatrix> {
    if thetas.is_empty() {
        return Err(Error::ContractViolation("design matrix needs at least one θ".into()));
    }
    let rows = thetas.len() * set.channels().len() * 5;
    let mut matrix = DMatrix::zeros(rows, 15);
    for (k, (i, j)) in non_identity_indices().enumerate() {
        let col = stacked(&pauli_pair(i, j), thetas, set);
        matrix.set_column(k, &DVector::from_vec(col));
    }
    let identity = ComplexMatrix::identity(4).scale(num_complex::Complex64::new(0.25, 0.0));
    let offset = DVector::from_vec(stacked(&identity, thetas, set));

    // pad so the SVD always yields all 15 right singular vectors
    let padded = DMatrix::from_fn(rows.max(15), 15, |r, c| if r < rows { matrix[(r, c)] } else { 0.0 });
    let svd = padded.svd(true, true);
    let (u_full, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v)) => (u, v),
        _ => return Err(Error::NumericalFailure("SVD of design matrix".into())),
    };
    let mut order: Vec<usize> = (0..15).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let svals: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let rank_tol = RANK_TOL * svals[0];
    let rank = svals.iter().filter(|&&s| s > rank_tol).count();
    let v = DMatrix::from_fn(15, 15, |r, c| v_t[(order[c], r)]);
    let u = DMatrix::from_fn(rows, 15, |r, c| u_full[(r, order[c])]);
    let null_space = (rank..15)
        .map(|c| {
            let mut out = [0.0; 15];
            out.iter_mut().enumerate().for_each(|(r, x)| *x = v[(r, c)]);
            out
        })
        .collect();
    Ok(DesignMatrix { thetas: thetas.to_vec(), channels: set, matrix, offset, svals, rank_tol, rank, null_space, v, u })
}

impl DesignMatrix {
    pub fn null_space_dims(&self) -> usize {
        15 - self.rank
    }

    /// Predicted stacked harmonics of a state with coefficients `c`.
    pub fn predict(&self, c: &PauliCoefficients) -> DVector<f64> {
        &self.matrix * DVector::from_row_slice(&c.non_identity()) + &self.offset
    }

    /// Minimum-norm solution restricted to singular values above `rank_tol`.
    pub fn solve(&self, data: &DVector<f64>) -> Result<[f64; 15]> {
        if data.len() != self.matrix.nrows() {
            return Err(Error::InputMismatch(format!(
                "{} harmonic coefficients for a {}-row design",
                data.len(),
                self.matrix.nrows()
            )));
        }
        let y = data - &self.offset;
        let mut x = DVector::zeros(15);
        for k in 0..self.rank {
            let proj = self.u.column(k).dot(&y) / self.svals[k];
            x += self.v.column(k) * proj;
        }
        let mut out = [0.0; 15];
        out.iter_mut().enumerate().for_each(|(i, v)| *v = x[i]);
        Ok(out)
    }
}

/// Stacks fitted coefficients in design-row order and inverts to `ρ^M`.
///
/// Returns `ρ^M` (Hermitian, unit trace, possibly not positive) and the
/// number of unobservable directions, which are set to zero.
pub fn invert_to_rho_m(fits: &[HarmonicFit], design: &DesignMatrix) -> Result<(ComplexMatrix, usize)> {
    if fits.len() != design.thetas.len()
        || fits.iter().zip(&design.thetas).any(|(f, t)| (f.theta - t).abs() > 1e-12)
    {
        return Err(Error::InputMismatch("fitted θ values differ from the design θ set".into()));
    }
    let mut data = Vec::with_capacity(design.matrix.nrows());
    for f in fits {
        for &ch in design.channels.channels() {
            let cf = f
                .channel(ch)
                .ok_or_else(|| Error::InputMismatch(format!("fit at θ = {} lacks channel {ch:?}", f.theta)))?;
            data.extend_from_slice(&cf.coeffs);
        }
    }
    let c = design.solve(&DVector::from_vec(data))?;
    let rho = pauli_compose(&PauliCoefficients::from_non_identity(0.25, &c));
    Ok((rho, design.null_space_dims()))
}
