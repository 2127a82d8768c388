//! Command implementations behind the `spinforge` binary.
//!
//! Exit codes: 0 success, 1 runtime or analysis failure, 2 usage or
//! configuration error.

pub mod acceptance;

use std::f64::consts::{PI, TAU};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use spinforge::config::{RunConfig, ScanKind};
use spinforge::gate_sim::{run_sequence_from, SimMode, SimOptions};
use spinforge::measurement::{generate_tau_scan, parity_signal, preparation_state, ReadoutModel, ScanData};
use spinforge::presets::{preset, DEFAULT_SEED, PRESET_NAMES};
use spinforge::quantum_core::{DensityMatrix, EntanglementReport};
use spinforge::tomography::{
    fit_eq4, tomo_pipeline, write_bar_csv, ChannelChoice, EchoModelFit, EchoModelFitOptions, TomoOptions, TomoResult, PARAM_NAMES,
};
use spinforge::trap_physics::{gate_phase, DerivedGeometry, ForcePulseParams, TrapConfig};
use spinforge::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Runtime(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Self::Usage(e.to_string()),
            other => Self::Runtime(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Analytic,
    Fock,
}

#[derive(Debug, Parser)]
#[command(name = "spinforge", version, about = "Two-ion spin-qubit gate simulation and tomography")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Built-in preset (config_a, config_b, double_w, single_w, fig1a, fig1b, fig2, fig3).
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,
    /// Overrides the scan seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derived trap geometry and force-pulse parameters.
    Calibrate,
    /// Final two-qubit state of the configured sequence.
    Simulate,
    /// Synthetic φ or τ scan data.
    Scan,
    /// State tomography from φ scans at two or more analysis angles.
    Tomo {
        /// Scan files (.json or .csv); generated from the configuration when omitted.
        files: Vec<PathBuf>,
        /// Invert the readout model of the configuration, or else the one stored in JSON data files.
        #[arg(long)]
        correct_readout: bool,
    },
    /// Closed-form model fit of a τ scan.
    FitModel {
        file: PathBuf,
    },
    /// Acceptance suite on the built-in presets.
    Report,
    /// Lists presets, or prints one as JSON.
    Presets { name: Option<String> },
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> CliResult<i32> {
    let c = &cli.common;
    match &cli.command {
        Command::Calibrate => cmd_calibrate(c),
        Command::Simulate => cmd_simulate(c),
        Command::Scan => cmd_scan(c),
        Command::Tomo { files, correct_readout } => cmd_tomo(c, files, *correct_readout),
        Command::FitModel { file } => cmd_fit_model(c, file),
        Command::Report => cmd_report(c),
        Command::Presets { name } => cmd_presets(name.as_deref()),
    }
}

fn load_config(c: &Common, fallback: Option<&str>) -> CliResult<Option<RunConfig>> {
    let mut cfg = match (&c.config, &c.preset) {
        (Some(_), Some(_)) => return Err(CliError::Usage("--config and --preset are mutually exclusive".into())),
        (Some(path), None) => {
            if !path.exists() {
                return Err(CliError::Usage(format!("configuration file {} not found", path.display())));
            }
            RunConfig::from_path(path)?
        }
        (None, Some(name)) => preset(name)?,
        (None, None) => match fallback {
            Some(name) => preset(name)?,
            None => return Ok(None),
        },
    };
    if let Some(mode) = c.mode {
        cfg.sim.mode = match mode {
            ModeArg::Analytic => SimMode::Analytic,
            ModeArg::Fock => SimMode::Fock,
        };
    }
    if let (Some(seed), Some(scan)) = (c.seed, cfg.scan.as_mut()) {
        scan.seed = seed;
    }
    Ok(Some(cfg))
}

fn require_config(c: &Common) -> CliResult<RunConfig> {
    load_config(c, None)?.ok_or_else(|| CliError::Usage("give --config <path> or --preset <name>".into()))
}

struct Output {
    dir: PathBuf,
    prefix: String,
}

impl Output {
    fn new(c: &Common, cfg: Option<&RunConfig>) -> Self {
        let dir = c.out.clone().unwrap_or_else(|| cfg.map(|x| PathBuf::from(&x.output.dir)).unwrap_or_else(|| "out".into()));
        let prefix = match cfg.map(|x| x.output.prefix.as_str()) {
            Some(p) if !p.is_empty() => format!("{p}_"),
            _ => String::new(),
        };
        Self { dir, prefix }
    }

    fn path(&self, name: &str) -> CliResult<PathBuf> {
        std::fs::create_dir_all(&self.dir).map_err(|e| CliError::Runtime(format!("{}: {e}", self.dir.display())))?;
        Ok(self.dir.join(format!("{}{name}", self.prefix)))
    }

    fn create(&self, name: &str) -> CliResult<(PathBuf, BufWriter<File>)> {
        let path = self.path(name)?;
        let f = File::create(&path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        Ok((path, BufWriter::new(f)))
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        let (path, mut w) = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Runtime(e.to_string()))?;
        writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::Runtime(e.to_string()))?;
        Ok(path)
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    println!("{}", serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?);
    Ok(())
}

#[derive(Serialize)]
struct CalibrationReport {
    name: String,
    trap: TrapConfig,
    derived: DerivedGeometry,
    force_pulse: Option<ForcePulseParams>,
    gate_phase_per_loop_rad: Option<f64>,
}

fn cmd_calibrate(c: &Common) -> CliResult<i32> {
    let cfg = require_config(c)?;
    let trap = cfg.trap_config()?;
    let derived = trap.derive()?;
    let force_pulse = cfg.force_pulse()?;
    let report = CalibrationReport {
        name: cfg.name.clone(),
        trap,
        derived,
        force_pulse,
        gate_phase_per_loop_rad: force_pulse.map(|p| gate_phase(p.omega_f, p.delta)).transpose()?,
    };
    if c.format == Some(Format::Json) {
        print_json(&report)?;
    } else {
        println!("calibration: {}", if cfg.name.is_empty() { "<unnamed>" } else { &cfg.name });
        for (name, value, unit) in derived.table() {
            println!("  {name:<18} {value:>14.6e} {unit}");
        }
        if let Some(p) = force_pulse {
            println!("  {:<18} {:>14.6e} Hz", "delta/2pi", p.delta / TAU);
            println!("  {:<18} {:>14.6e} Hz", "pulse Omega_f/2pi", p.omega_f / TAU);
            println!("  {:<18} {:>14.6e} Hz", "Delta_c/2pi", p.delta_c / TAU);
            println!("  {:<18} {:>14.6e} s", "tau", p.tau);
            println!("  {:<18} {:>14.6} pi", "Psi per loop", report.gate_phase_per_loop_rad.unwrap_or(0.0) / PI);
        }
    }
    if c.out.is_some() {
        let path = Output::new(c, Some(&cfg)).write_json("calibration.json", &report)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(0)
}

#[derive(Serialize)]
struct SimulationOutput<'a> {
    name: &'a str,
    sequence_id: String,
    sim: SimOptions,
    p_prep: f64,
    populations: [f64; 4],
    report: EntanglementReport,
    rho: &'a DensityMatrix,
    sequence: spinforge::gate_sim::PulseSequence,
}

fn cmd_simulate(c: &Common) -> CliResult<i32> {
    let cfg = require_config(c)?;
    let seq = cfg.sequence()?;
    let rho = run_sequence_from(&preparation_state(cfg.readout.p_prep)?, &seq, &cfg.sim)?;
    let report = EntanglementReport::of(&rho)?;
    let out = Output::new(c, Some(&cfg));
    let payload = SimulationOutput {
        name: &cfg.name,
        sequence_id: cfg.sequence_id(),
        sim: cfg.sim,
        p_prep: cfg.readout.p_prep,
        populations: rho.populations(),
        report,
        rho: &rho,
        sequence: seq,
    };
    let json = out.write_json("rho.json", &payload)?;
    let (bars, w) = out.create("rho_bars.csv")?;
    write_bar_csv(rho.matrix(), w)?;
    if c.format == Some(Format::Json) {
        print_json(&report)?;
    } else {
        print_report(&report);
    }
    eprintln!("wrote {} and {}", json.display(), bars.display());
    Ok(0)
}

fn print_report(r: &EntanglementReport) {
    println!("fidelity    {:.6}", r.fidelity);
    println!("best_r      {:.6} pi", r.best_r / PI);
    println!("|C|         {:.6}", r.coherence().norm());
    println!("concurrence {:.6}", r.concurrence);
    println!("EoF         {:.6}", r.eof);
}

/// Data of a configured scan: one dataset per θ, or a single τ scan.
pub enum Generated {
    Phi(Vec<ScanData>),
    Tau(ScanData),
}

pub fn generate(cfg: &RunConfig) -> spinforge::Result<Generated> {
    let scan = cfg.scan_file()?;
    match scan.kind {
        ScanKind::Phi => Ok(Generated::Phi(acceptance::preset_phi_scans(cfg, scan.seed)?)),
        ScanKind::Tau => {
            let taus = scan.tau.expect("validated τ grid").values_s();
            let data = generate_tau_scan(
                |t| cfg.sequence_with_tau(Some(t)).expect("validated echo sequence"),
                &taus,
                &cfg.scan_spec()?,
            )?;
            Ok(Generated::Tau(data))
        }
    }
}

fn theta_tag(theta: f64) -> String {
    format!("theta_{:.3}pi", theta / PI)
}

fn write_scan(out: &Output, stem: &str, data: &ScanData, format: Option<Format>) -> CliResult<Vec<PathBuf>> {
    let mut paths = Vec::new();
    if format != Some(Format::Csv) {
        paths.push(out.path(&format!("{stem}.json"))?);
    }
    if format != Some(Format::Json) {
        paths.push(out.path(&format!("{stem}.csv"))?);
    }
    for p in &paths {
        data.write_path(p)?;
    }
    Ok(paths)
}

/// Plot columns: setting, frequencies and parity per point.
fn write_plot_csv(out: &Output, name: &str, scans: &[ScanData]) -> CliResult<PathBuf> {
    let (path, mut w) = out.create(name)?;
    writeln!(w, "theta_rad,phi_rad,tau_s,p_uu,p_mid,p_dd,parity,n_shots").map_err(io_err)?;
    for scan in scans {
        for r in &scan.records {
            let f = r.frequencies();
            let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                opt(r.theta()),
                opt(r.phi()),
                opt(r.tau()),
                f.p_uu,
                f.p_mid,
                f.p_dd,
                parity_signal(&f),
                r.n_shots
            )
            .map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)?;
    Ok(path)
}

fn cmd_scan(c: &Common) -> CliResult<i32> {
    let cfg = require_config(c)?;
    let out = Output::new(c, Some(&cfg));
    let mut written = Vec::new();
    match generate(&cfg)? {
        Generated::Phi(scans) => {
            for s in &scans {
                written.extend(write_scan(&out, &format!("scan_{}", theta_tag(s.thetas()[0])), s, c.format)?);
            }
            written.push(write_plot_csv(&out, "scan_plot.csv", &scans)?);
        }
        Generated::Tau(scan) => {
            written.extend(write_scan(&out, "scan_tau", &scan, c.format)?);
            written.push(write_plot_csv(&out, "scan_plot.csv", std::slice::from_ref(&scan))?);
        }
    }
    for p in written {
        println!("{}", p.display());
    }
    Ok(0)
}

#[derive(Serialize)]
struct TomoOutput<'a> {
    name: String,
    inputs: Vec<String>,
    result: &'a TomoResult,
}

fn read_scans(files: &[PathBuf]) -> CliResult<Vec<ScanData>> {
    files
        .iter()
        .map(|f| {
            if !f.exists() {
                return Err(CliError::Usage(format!("data file {} not found", f.display())));
            }
            ScanData::read_path(f).map_err(CliError::from)
        })
        .collect()
}

fn cmd_tomo(c: &Common, files: &[PathBuf], correct_readout: bool) -> CliResult<i32> {
    let cfg = load_config(c, None)?;
    let (scans, inputs) = if files.is_empty() {
        let cfg = cfg.as_ref().ok_or_else(|| CliError::Usage("give scan files, --config or --preset".into()))?;
        match generate(cfg)? {
            Generated::Phi(scans) => (scans, vec![format!("generated from {}", cfg.name)]),
            Generated::Tau(_) => return Err(CliError::Usage("tomography needs a φ scan configuration".into())),
        }
    } else {
        (read_scans(files)?, files.iter().map(|f| f.display().to_string()).collect())
    };
    if scans.iter().any(|s| !s.is_phi_scan()) {
        return Err(CliError::Usage("tomography input must be φ scans".into()));
    }
    let mut thetas: Vec<f64> = scans.iter().flat_map(|s| s.thetas()).collect();
    thetas.sort_by(f64::total_cmp);
    thetas.dedup();
    if thetas.len() < 2 {
        return Err(CliError::Usage(format!(
            "tomography needs datasets at two or more analysis angles, got {}",
            thetas.len()
        )));
    }
    // CSV inputs carry no metadata, so a configured readout model takes precedence
    let readout = match (&cfg, correct_readout) {
        (Some(cfg), true) => Some(cfg.readout),
        (None, true) => Some(
            scans[0]
                .metadata
                .readout
                .ok_or_else(|| CliError::Usage("--correct-readout: data files carry no readout model; give --config or --preset".into()))?,
        ),
        (Some(cfg), false) => cfg.analysis_readout(),
        (None, false) => None,
    };
    let result = tomo_pipeline(&scans, &TomoOptions { channels: ChannelChoice::Auto, readout })?;
    let out = Output::new(c, cfg.as_ref());
    let name = cfg.as_ref().map(|x| x.name.clone()).unwrap_or_default();
    let json = out.write_json("tomo.json", &TomoOutput { name, inputs, result: &result })?;
    let (bars_p, w) = out.create("rho_bars.csv")?;
    write_bar_csv(result.rho_p.matrix(), w)?;
    let (bars_m, w) = out.create("rho_m_bars.csv")?;
    write_bar_csv(&result.rho_m, w)?;
    if c.format == Some(Format::Json) {
        print_json(&result.report)?;
    } else {
        print_report(&result.report);
        println!("rank        {} ({:?} channels)", result.diagnostics.rank, result.diagnostics.channels);
    }
    eprintln!("wrote {}, {} and {}", json.display(), bars_p.display(), bars_m.display());
    Ok(0)
}

#[derive(Serialize)]
struct FitOutput<'a> {
    input: String,
    fit: &'a EchoModelFit,
    param_names: [&'static str; 4],
    gamma_per_ms: f64,
    delta_over_2pi_hz: f64,
    omega_f_over_2pi_hz: f64,
    delta_c_over_2pi_hz: f64,
    delta_phi_rad: Option<f64>,
}

fn cmd_fit_model(c: &Common, file: &Path) -> CliResult<i32> {
    let cfg = load_config(c, Some("fig1a"))?.expect("fallback preset");
    let scan = read_scans(&[file.to_path_buf()])?.remove(0);
    if scan.is_phi_scan() {
        return Err(CliError::Usage("fit-model needs a τ scan".into()));
    }
    let opts = EchoModelFitOptions {
        readout: cfg.analysis_readout(),
        nbar: cfg.sim.nbar,
        include_thermal_coherence_factor: cfg.sim.include_thermal_coherence_factor,
        ..EchoModelFitOptions::default()
    };
    let fit = fit_eq4(&scan, &cfg.fit_guess()?, &opts)?;
    let p = fit.params;
    let payload = FitOutput {
        input: file.display().to_string(),
        fit: &fit,
        param_names: PARAM_NAMES,
        gamma_per_ms: p.gamma * 1e-3,
        delta_over_2pi_hz: p.delta / TAU,
        omega_f_over_2pi_hz: p.omega_f / TAU,
        delta_c_over_2pi_hz: p.delta_c / TAU,
        delta_phi_rad: fit.delta_phi(&cfg.trap_config()?).ok(),
    };
    let out = Output::new(c, Some(&cfg));
    let json = out.write_json("fit.json", &payload)?;
    let (resid, mut w) = out.create("fit_residuals.csv")?;
    let model_readout = opts.readout.unwrap_or(ReadoutModel::IDEAL);
    writeln!(w, "tau_s,p_uu_data,p_uu_model,p_mid_data,p_mid_model,n_shots").map_err(io_err)?;
    for r in &scan.records {
        let tau = r.tau().expect("τ scan");
        let (uu, mid) = p.populations(tau, opts.nbar, opts.include_thermal_coherence_factor)?;
        let pred = spinforge::measurement::apply_readout_errors(
            &spinforge::measurement::OutcomeProbs::new(uu, mid, (1.0 - uu - mid).max(0.0))?,
            &ReadoutModel { p_prep: 1.0, ..model_readout },
        );
        let f = r.frequencies();
        writeln!(w, "{tau},{},{},{},{},{}", f.p_uu, pred.p_uu, f.p_mid, pred.p_mid, r.n_shots)
            .map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    if c.format == Some(Format::Json) {
        print_json(&payload)?;
    } else {
        for (k, name) in PARAM_NAMES.iter().enumerate() {
            let v = [p.gamma, p.delta, p.omega_f, p.delta_c][k];
            println!("{name:<14} {v:>14.6e} ± {:.2e}", fit.std_err[k]);
        }
        println!("reduced chi2   {:.4}", fit.reduced_chi2);
    }
    eprintln!("wrote {} and {}", json.display(), resid.display());
    Ok(0)
}

fn cmd_report(c: &Common) -> CliResult<i32> {
    let seed = c.seed.unwrap_or(DEFAULT_SEED);
    let report = acceptance::run_all(seed)?;
    if c.format == Some(Format::Json) {
        print_json(&report)?;
    } else {
        print!("{}", report.table());
    }
    if c.out.is_some() {
        let path = Output::new(c, None).write_json("acceptance.json", &report)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(if report.pass { 0 } else { 1 })
}

fn cmd_presets(name: Option<&str>) -> CliResult<i32> {
    match name {
        None => {
            for n in PRESET_NAMES {
                println!("{n}");
            }
        }
        Some(n) => println!("{}", preset(n)?.to_json_pretty()?),
    }
    Ok(0)
}

/// Installs the global rayon pool from `SPINFORGE_THREADS` (unset or 0: automatic).
pub fn init_threads() -> CliResult<()> {
    let threads = match std::env::var("SPINFORGE_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("SPINFORGE_THREADS={v:?} is not a count")))?,
        Err(_) => 0,
    };
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    Ok(())
}
