use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn spinforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinforge")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn preset_json(name: &str) -> Value {
    let o = spinforge(&["presets", name]);
    assert_eq!(code(&o), 0);
    serde_json::from_slice(&o.stdout).unwrap()
}

fn write_config(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn calibrate_reports_geometry() {
    let o = spinforge(&["calibrate", "--preset", "config_a", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["derived"]["eta"].as_f64().unwrap() - 0.133).abs() < 0.002);
    assert!((v["derived"]["p_real"].as_f64().unwrap() - 22.0).abs() < 0.2);
    let o = spinforge(&["calibrate", "--preset", "config_b"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("eta"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = preset_json("config_a");
    v["trap"].as_object_mut().unwrap().remove("omega_c_hz");
    let p = write_config(dir.path(), "bad.json", &v);
    assert_eq!(code(&spinforge(&["calibrate", "--config", s(&p)])), 2);
    assert_eq!(code(&spinforge(&["calibrate", "--preset", "nope"])), 2);
    assert_eq!(code(&spinforge(&["calibrate", "--config", "/nonexistent/cfg.json"])), 2);
    assert_eq!(code(&spinforge(&["calibrate"])), 2);
    assert_eq!(code(&spinforge(&["frobnicate"])), 2);
}

#[test]
fn simulate_ideal_and_force_free() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = spinforge(&["simulate", "--preset", "double_w", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&out.join("double_w_rho.json"));
    assert!(v["report"]["fidelity"].as_f64().unwrap() >= 0.999);
    assert!(out.join("double_w_rho_bars.csv").exists());

    let mut cfg = preset_json("double_w");
    cfg["sequence"]["omega_f_hz"] = 0.0.into();
    let p = write_config(dir.path(), "free.json", &cfg);
    let o = spinforge(&["simulate", "--config", s(&p), "--out", s(&out), "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(rep["concurrence"].as_f64().unwrap() < 1e-12);
}

#[test]
fn fig2_scan_files_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = spinforge(&["scan", "--preset", "fig2", "--out", s(d)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<String> =
        std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(
        names,
        [
            "fig2_scan_plot.csv",
            "fig2_scan_theta_0.540pi.csv",
            "fig2_scan_theta_0.540pi.json",
            "fig2_scan_theta_0.660pi.csv",
            "fig2_scan_theta_0.660pi.json"
        ]
    );
    for n in &names {
        assert_eq!(std::fs::read(a.join(n)).unwrap(), std::fs::read(b.join(n)).unwrap(), "{n}");
    }
    let v = read_json(&a.join("fig2_scan_theta_0.540pi.json"));
    let records = v["records"].as_array().unwrap();
    assert_eq!(records.len(), 36);
    assert!(records.iter().all(|r| r["n_shots"] == 500));

    let o = spinforge(&["scan", "--preset", "fig2", "--out", s(&b), "--seed", "5"]);
    assert_eq!(code(&o), 0);
    assert_ne!(
        std::fs::read(a.join("fig2_scan_theta_0.540pi.csv")).unwrap(),
        std::fs::read(b.join("fig2_scan_theta_0.540pi.csv")).unwrap()
    );
}

#[test]
fn fig1b_parity_scan() {
    let dir = tempfile::tempdir().unwrap();
    let o = spinforge(&["scan", "--preset", "fig1b", "--out", s(dir.path()), "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = read_json(&dir.path().join("fig1b_scan_theta_0.460pi.json"));
    let records = v["records"].as_array().unwrap();
    assert!(records.iter().all(|r| r["n_shots"] == 1000));
    assert!(!dir.path().join("fig1b_scan_theta_0.460pi.csv").exists());
}

#[test]
fn tomo_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    assert_eq!(code(&spinforge(&["scan", "--preset", "fig2", "--out", s(&data), "--format", "csv"])), 0);
    let f1 = data.join("fig2_scan_theta_0.540pi.csv");
    let f2 = data.join("fig2_scan_theta_0.660pi.csv");

    let o = spinforge(&["tomo", s(&f1), "--out", s(dir.path())]);
    assert_eq!(code(&o), 2);

    let out = dir.path().join("tomo");
    let o = spinforge(&["tomo", s(&f1), s(&f2), "--correct-readout", "--out", s(&out)]);
    assert_eq!(code(&o), 2, "CSV has no readout model");
    let o = spinforge(&["tomo", s(&f1), s(&f2), "--preset", "fig2", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&out.join("fig2_tomo.json"));
    let f = v["result"]["report"]["fidelity"].as_f64().unwrap();
    assert!((0.78..0.88).contains(&f), "{f}");
    let bars = std::fs::read_to_string(out.join("fig2_rho_bars.csv")).unwrap();
    assert_eq!(bars.lines().count(), 17);
}

#[test]
fn tomo_exact_bell_input() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = preset_json("double_w");
    cfg["scan"] = serde_json::json!({
        "kind": "phi", "theta_rad": [0.54 * std::f64::consts::PI, 0.66 * std::f64::consts::PI],
        "shots": 500, "seed": 1, "exact": true, "resolved": true
    });
    let p = write_config(dir.path(), "exact.json", &cfg);
    let o = spinforge(&["tomo", "--config", s(&p), "--out", s(dir.path()), "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(rep["fidelity"].as_f64().unwrap() > 1.0 - 1e-6);
}

#[test]
fn fit_model_on_fig1a_scan() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&spinforge(&["scan", "--preset", "fig1a", "--out", s(dir.path()), "--format", "json"])), 0);
    let data = dir.path().join("fig1a_scan_tau.json");
    let o = spinforge(&["fit-model", s(&data), "--out", s(dir.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&dir.path().join("fig1a_fit.json"));
    let gamma = v["fit"]["params"]["gamma_s_inv"].as_f64().unwrap();
    assert!((gamma - 5.4e3).abs() < 0.2 * 5.4e3, "{gamma}");
    let resid = std::fs::read_to_string(dir.path().join("fig1a_fit_residuals.csv")).unwrap();
    assert_eq!(resid.lines().count(), 102);

    let o = spinforge(&["fit-model", s(&dir.path().join("missing.json"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn presets_listed() {
    let o = spinforge(&["presets"]);
    let text = String::from_utf8_lossy(&o.stdout);
    for n in ["config_a", "fig1a", "fig1b", "fig2", "fig3"] {
        assert!(text.lines().any(|l| l == n));
    }
}
