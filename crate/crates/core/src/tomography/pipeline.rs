use std::io::Write;

use serde::{Deserialize, Serialize};

use super::design::{build_design_matrix, invert_to_rho_m};
use super::harmonics::{fit_phi_harmonics, ChannelSet, HarmonicFit};
use super::ml::ml_project;
use crate::error::{Error, Result};
use crate::measurement::{ReadoutModel, ScanData};
use crate::quantum_core::{ComplexMatrix, DensityMatrix, EntanglementReport};

/// Channel selection for the inversion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelChoice {
    /// Resolved when every record carries the `(↑↓, ↓↑)` split, pooled otherwise.
    #[default]
    Auto,
    Pooled,
    Resolved,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TomoOptions {
    pub channels: ChannelChoice,
    /// Invert this readout confusion on every point before fitting.
    pub readout: Option<ReadoutModel>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TomoDiagnostics {
    pub channels: ChannelSet,
    pub thetas: Vec<f64>,
    pub fits: Vec<HarmonicFit>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub rank_tol: f64,
    pub readout_corrected: bool,
    pub ml_start: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TomoResult {
    pub rho_m: ComplexMatrix,
    pub rho_p: DensityMatrix,
    pub null_space_dims: usize,
    pub cost: f64,
    pub report: EntanglementReport,
    pub diagnostics: TomoDiagnostics,
}

/// Harmonic fits per θ, inversion to `ρ^M`, projection to `ρ^P` and metrics.
///
/// `scans` may hold one dataset per θ or multi-θ datasets; at least two
/// distinct θ values are required.
pub fn tomo_pipeline(scans: &[ScanData], opts: &TomoOptions) -> Result<TomoResult> {
    let parts: Vec<ScanData> = scans.iter().flat_map(ScanData::split_by_theta).collect();
    let thetas: Vec<f64> = parts.iter().flat_map(|p| p.thetas()).collect();
    let mut distinct = thetas.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "tomography needs two distinct θ values, got {}",
            distinct.len()
        )));
    }
    let set = match opts.channels {
        ChannelChoice::Pooled => ChannelSet::Pooled,
        ChannelChoice::Resolved => ChannelSet::Resolved,
        ChannelChoice::Auto if parts.iter().all(ScanData::has_resolved_counts) => ChannelSet::Resolved,
        ChannelChoice::Auto => ChannelSet::Pooled,
    };
    let fits = parts
        .iter()
        .map(|p| fit_phi_harmonics(p, set, opts.readout.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let design = build_design_matrix(&thetas, set)?;
    let (rho_m, null_space_dims) = invert_to_rho_m(&fits, &design)?;
    let ml = ml_project(&rho_m)?;
    let report = EntanglementReport::of(&ml.rho_p)?;
    let two_c = 2.0 * report.coherence().norm();
    if report.fidelity + 1e-9 < two_c {
        return Err(Error::NumericalFailure(format!(
            "reconstruction violates F ≥ 2|C| ({} < {two_c})",
            report.fidelity
        )));
    }
    Ok(TomoResult {
        rho_m,
        rho_p: ml.rho_p,
        null_space_dims,
        cost: ml.cost,
        report,
        diagnostics: TomoDiagnostics {
            channels: set,
            thetas,
            fits,
            singular_values: design.svals.clone(),
            rank: design.rank,
            rank_tol: design.rank_tol,
            readout_corrected: opts.readout.is_some_and(|m| !m.is_ideal_readout()),
            ml_start: ml.start,
        },
    })
}

/// Bar-chart data `row,col,abs,phase_rad` for every element of `m`.
pub fn write_bar_csv<W: Write>(m: &ComplexMatrix, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["row", "col", "abs", "phase_rad"])?;
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            let z = m[(i, j)];
            out.write_record([i.to_string(), j.to_string(), z.norm().to_string(), z.arg().to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}
