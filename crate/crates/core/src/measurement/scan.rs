use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::readout::{
    apply_readout_errors_resolved, preparation_state, resolved_probs, OutcomeProbs, ReadoutModel, ResolvedProbs,
};
use super::sampling::{point_rng, sample_resolved};
use crate::error::{Error, Result};
use crate::gate_sim::{run_sequence_from, PulseSequence, SimOptions};
use crate::quantum_core::{collective_rotate, DensityMatrix, Rotation};

pub const PARITY_CONVENTION: &str = "p_uu + p_dd - p_mid";

/// Scan coordinate of one record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Setting {
    /// Analysis rotation `R(θ, φ)` after the sequence.
    Phi { theta_rad: f64, phi_rad: f64 },
    /// Force-pulse duration, no analysis rotation.
    Tau { tau_s: f64 },
}

impl Setting {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Phi { .. } => "phi",
            Self::Tau { .. } => "tau",
        }
    }

    fn order_key(&self) -> (u8, f64, f64) {
        match *self {
            Self::Phi { theta_rad, phi_rad } => (0, theta_rad, phi_rad),
            Self::Tau { tau_s } => (1, tau_s, 0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    #[serde(flatten)]
    pub setting: Setting,
    pub n_uu: u64,
    pub n_mid: u64,
    pub n_dd: u64,
    pub n_shots: u64,
    /// `(n_ud, n_du)` when the ions are read out individually.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<[u64; 2]>,
    /// Outcome probabilities `(uu, ud, du, dd)` for noiseless datasets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<[f64; 4]>,
}

impl ScanRecord {
    pub fn validate(&self) -> Result<()> {
        if self.n_shots == 0 {
            return Err(Error::ContractViolation("record with zero shots".into()));
        }
        if self.n_uu + self.n_mid + self.n_dd != self.n_shots {
            return Err(Error::ContractViolation(format!(
                "counts {} + {} + {} do not sum to {}",
                self.n_uu, self.n_mid, self.n_dd, self.n_shots
            )));
        }
        if let Some([a, b]) = self.split {
            if a + b != self.n_mid {
                return Err(Error::ContractViolation("resolved counts do not sum to n_mid".into()));
            }
        }
        Ok(())
    }

    pub fn counts(&self) -> [u64; 3] {
        [self.n_uu, self.n_mid, self.n_dd]
    }

    /// Observed frequencies, or the exact probabilities when present.
    pub fn frequencies(&self) -> OutcomeProbs {
        if let Some(p) = self.exact {
            return ResolvedProbs(p).pooled();
        }
        let n = self.n_shots as f64;
        OutcomeProbs { p_uu: self.n_uu as f64 / n, p_mid: self.n_mid as f64 / n, p_dd: self.n_dd as f64 / n }
    }

    /// Resolved frequencies `(uu, ud, du, dd)` if the record keeps the split
    /// (exact probabilities when present).
    pub fn resolved_frequencies(&self) -> Option<[f64; 4]> {
        let [a, b] = self.split?;
        if let Some(p) = self.exact {
            return Some(p);
        }
        let n = self.n_shots as f64;
        Some([self.n_uu as f64 / n, a as f64 / n, b as f64 / n, self.n_dd as f64 / n])
    }

    pub fn theta(&self) -> Option<f64> {
        match self.setting {
            Setting::Phi { theta_rad, .. } => Some(theta_rad),
            Setting::Tau { .. } => None,
        }
    }

    pub fn phi(&self) -> Option<f64> {
        match self.setting {
            Setting::Phi { phi_rad, .. } => Some(phi_rad),
            Setting::Tau { .. } => None,
        }
    }

    pub fn tau(&self) -> Option<f64> {
        match self.setting {
            Setting::Tau { tau_s } => Some(tau_s),
            Setting::Phi { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanMetadata {
    #[serde(default)]
    pub sequence_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<PulseSequence>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<SimOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout: Option<ReadoutModel>,
    #[serde(default)]
    pub exact: bool,
    #[serde(default)]
    pub resolved: bool,
    #[serde(default = "default_parity")]
    pub parity_convention: String,
    #[serde(default = "default_units")]
    pub units: String,
}

fn default_parity() -> String {
    PARITY_CONVENTION.into()
}

fn default_units() -> String {
    "angles rad, durations s, rates s^-1, frequencies rad/s".into()
}

impl Default for ScanMetadata {
    fn default() -> Self {
        Self {
            sequence_id: String::new(),
            sequence: None,
            seed: 0,
            options: None,
            readout: None,
            exact: false,
            resolved: false,
            parity_convention: default_parity(),
            units: default_units(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanData {
    pub metadata: ScanMetadata,
    pub records: Vec<ScanRecord>,
}

impl ScanData {
    pub fn new(metadata: ScanMetadata, records: Vec<ScanRecord>) -> Result<Self> {
        let s = Self { metadata, records };
        s.validate()?;
        Ok(s)
    }

    /// Non-empty, one scan kind, settings strictly increasing.
    pub fn validate(&self) -> Result<()> {
        if self.records.is_empty() {
            return Err(Error::ContractViolation("scan has no records".into()));
        }
        for r in &self.records {
            r.validate()?;
        }
        for w in self.records.windows(2) {
            let (a, b) = (w[0].setting.order_key(), w[1].setting.order_key());
            if a.0 != b.0 {
                return Err(Error::ContractViolation("scan mixes φ and τ records".into()));
            }
            if a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) {
                return Err(Error::ContractViolation(format!(
                    "scan settings not strictly ordered at {:?} → {:?}",
                    w[0].setting, w[1].setting
                )));
            }
        }
        Ok(())
    }

    pub fn is_phi_scan(&self) -> bool {
        matches!(self.records.first().map(|r| r.setting), Some(Setting::Phi { .. }))
    }

    /// Distinct analysis angles, in order of appearance.
    pub fn thetas(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for t in self.records.iter().filter_map(ScanRecord::theta) {
            if out.last() != Some(&t) {
                out.push(t);
            }
        }
        out
    }

    /// Splits a multi-θ φ scan into one dataset per θ.
    pub fn split_by_theta(&self) -> Vec<ScanData> {
        self.thetas()
            .into_iter()
            .map(|t| ScanData {
                metadata: self.metadata.clone(),
                records: self.records.iter().filter(|r| r.theta() == Some(t)).cloned().collect(),
            })
            .collect()
    }

    /// Concatenates datasets (e.g. several θ values) into one; settings must stay ordered.
    pub fn concat(parts: &[ScanData]) -> Result<ScanData> {
        let first = parts
            .first()
            .ok_or_else(|| Error::ContractViolation("nothing to concatenate".into()))?;
        let records = parts.iter().flat_map(|p| p.records.iter().cloned()).collect();
        ScanData::new(first.metadata.clone(), records)
    }

    pub fn has_resolved_counts(&self) -> bool {
        self.records.iter().all(|r| r.resolved_frequencies().is_some())
    }

    pub fn is_exact(&self) -> bool {
        self.records.iter().all(|r| r.exact.is_some())
    }

    pub fn to_json_writer<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn from_json_reader<R: Read>(r: R) -> Result<Self> {
        let s: Self = serde_json::from_reader(r)?;
        s.validate()?;
        Ok(s)
    }

    /// CSV with header `kind,theta_rad,phi_rad,tau_s,n_uu,n_mid,n_dd,n_shots`.
    pub fn to_csv_writer<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.records {
            let (theta_rad, phi_rad, tau_s) = match r.setting {
                Setting::Phi { theta_rad, phi_rad } => (Some(theta_rad), Some(phi_rad), None),
                Setting::Tau { tau_s } => (None, None, Some(tau_s)),
            };
            out.serialize(CsvRow {
                kind: r.setting.kind().into(),
                theta_rad,
                phi_rad,
                tau_s,
                n_uu: r.n_uu,
                n_mid: r.n_mid,
                n_dd: r.n_dd,
                n_shots: r.n_shots,
            })?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn from_csv_reader<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut records = Vec::new();
        for row in rdr.deserialize() {
            let row: CsvRow = row?;
            let missing = |name: &str| Error::Config(format!("{} row without {name}", row.kind));
            let setting = match row.kind.as_str() {
                "phi" => Setting::Phi {
                    theta_rad: row.theta_rad.ok_or_else(|| missing("theta_rad"))?,
                    phi_rad: row.phi_rad.ok_or_else(|| missing("phi_rad"))?,
                },
                "tau" => Setting::Tau { tau_s: row.tau_s.ok_or_else(|| missing("tau_s"))? },
                other => return Err(Error::Config(format!("unknown scan kind {other:?}"))),
            };
            records.push(ScanRecord {
                setting,
                n_uu: row.n_uu,
                n_mid: row.n_mid,
                n_dd: row.n_dd,
                n_shots: row.n_shots,
                split: None,
                exact: None,
            });
        }
        ScanData::new(ScanMetadata::default(), records)
    }

    pub fn read_path(path: &std::path::Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Self::from_csv_reader(f),
            _ => Self::from_json_reader(std::io::BufReader::new(f)),
        }
    }

    pub fn write_path(&self, path: &std::path::Path) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => self.to_csv_writer(f),
            _ => self.to_json_writer(f),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    kind: String,
    theta_rad: Option<f64>,
    phi_rad: Option<f64>,
    tau_s: Option<f64>,
    n_uu: u64,
    n_mid: u64,
    n_dd: u64,
    n_shots: u64,
}

/// Everything needed to turn states into a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub shots: u64,
    pub seed: u64,
    pub readout: ReadoutModel,
    pub sim: SimOptions,
    /// Also store noiseless outcome probabilities in every record.
    #[serde(default)]
    pub exact: bool,
    /// Keep the `(↑↓, ↓↑)` split of the middle outcome.
    #[serde(default)]
    pub resolved: bool,
    #[serde(default)]
    pub sequence_id: String,
}

impl ScanSpec {
    pub fn new(shots: u64, seed: u64) -> Self {
        Self {
            shots,
            seed,
            readout: ReadoutModel::default(),
            sim: SimOptions::default(),
            exact: false,
            resolved: false,
            sequence_id: String::new(),
        }
    }

    fn metadata(&self, sequence: Option<PulseSequence>) -> ScanMetadata {
        ScanMetadata {
            sequence_id: self.sequence_id.clone(),
            sequence,
            seed: self.seed,
            options: Some(self.sim),
            readout: Some(self.readout),
            exact: self.exact,
            resolved: self.resolved,
            ..ScanMetadata::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::ContractViolation("number of shots must be ≥ 1".into()));
        }
        self.readout.validate()?;
        self.sim.validate()
    }

    fn record(&self, setting: Setting, rho: &DensityMatrix, index: u64) -> Result<ScanRecord> {
        let probs = apply_readout_errors_resolved(&resolved_probs(rho), &self.readout);
        let mut rng = point_rng(self.seed, index);
        let [uu, ud, du, dd] = sample_resolved(&probs, self.shots, &mut rng)?;
        Ok(ScanRecord {
            setting,
            n_uu: uu,
            n_mid: ud + du,
            n_dd: dd,
            n_shots: self.shots,
            split: self.resolved.then_some([ud, du]),
            exact: self.exact.then_some(probs.0),
        })
    }
}

fn strictly_increasing(xs: &[f64], what: &str) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::ContractViolation(format!("empty {what} list")));
    }
    if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::ContractViolation(format!("{what} values must be finite and strictly increasing")));
    }
    Ok(())
}

/// Runs `seq` once from the imperfectly prepared input, then records the
/// analysis rotation `R(θ, φ)` outcome statistics for every `φ`.
///
/// Point `k` draws its shots from the stream `derive_seed(spec.seed, k)`.
pub fn generate_phi_scan(seq: &PulseSequence, theta: f64, phis: &[f64], spec: &ScanSpec) -> Result<ScanData> {
    spec.validate()?;
    strictly_increasing(phis, "φ")?;
    let initial = preparation_state(spec.readout.p_prep)?;
    let rho = run_sequence_from(&initial, seq, &spec.sim)?;
    let mut scan = phi_scan_of_state(&rho, theta, phis, spec)?;
    scan.metadata.sequence = Some(seq.clone());
    Ok(scan)
}

/// φ scan of a given two-qubit state; preparation error is not applied.
pub fn phi_scan_of_state(rho: &DensityMatrix, theta: f64, phis: &[f64], spec: &ScanSpec) -> Result<ScanData> {
    spec.validate()?;
    strictly_increasing(phis, "φ")?;
    let records = phis
        .par_iter()
        .enumerate()
        .map(|(k, &phi)| {
            let rotated = collective_rotate(rho, Rotation { theta, phi });
            spec.record(Setting::Phi { theta_rad: theta, phi_rad: phi }, &rotated, k as u64)
        })
        .collect::<Result<Vec<_>>>()?;
    ScanData::new(spec.metadata(None), records)
}

/// Outcome statistics of `build(τ)` for every `τ`, without analysis rotation.
pub fn generate_tau_scan<F>(build: F, taus: &[f64], spec: &ScanSpec) -> Result<ScanData>
where
    F: Fn(f64) -> PulseSequence + Sync,
{
    spec.validate()?;
    strictly_increasing(taus, "τ")?;
    let initial = preparation_state(spec.readout.p_prep)?;
    let records = taus
        .par_iter()
        .enumerate()
        .map(|(k, &tau)| {
            let rho = run_sequence_from(&initial, &build(tau), &spec.sim)?;
            spec.record(Setting::Tau { tau_s: tau }, &rho, k as u64)
        })
        .collect::<Result<Vec<_>>>()?;
    ScanData::new(spec.metadata(None), records)
}

/// `n` uniformly spaced angles over `[0, 2π)`.
pub fn uniform_phis(n: usize) -> Vec<f64> {
    (0..n).map(|k| std::f64::consts::TAU * k as f64 / n as f64).collect()
}
