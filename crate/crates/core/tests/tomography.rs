use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use spinforge::gate_sim::EchoModelParams;
use spinforge::measurement::{phi_scan_of_state, uniform_phis, ReadoutModel, ScanData, ScanSpec};
use spinforge::quantum_core::{
    bell_fidelity, bell_state, pauli_compose, pauli_decompose, ComplexMatrix, DensityMatrix, EntanglementReport,
    PauliCoefficients, DD,
};
use spinforge::tomography::{
    build_design_matrix, coherence_from_parity, fit_eq4, fit_harmonics, fit_phi_harmonics,
    invert_to_rho_m, ml_project, tomo_pipeline, Channel, ChannelChoice, ChannelSet, EchoModelFitOptions, TomoOptions,
};

const FIG2_THETAS: [f64; 2] = [0.54 * PI, 0.66 * PI];

fn exact_spec(resolved: bool) -> ScanSpec {
    ScanSpec { readout: ReadoutModel::IDEAL, exact: true, resolved, ..ScanSpec::new(500, 0) }
}

fn exact_scans(rho: &DensityMatrix, thetas: &[f64], resolved: bool) -> Vec<ScanData> {
    thetas
        .iter()
        .map(|&t| phi_scan_of_state(rho, t, &uniform_phis(36), &exact_spec(resolved)).unwrap())
        .collect()
}

fn random_density(rng: &mut impl Rng) -> DensityMatrix {
    let g = DMatrix::from_fn(4, 4, |_, _| {
        C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::new(ComplexMatrix::from_dmatrix(m / tr).unwrap().hermitian_part()).unwrap()
}

/// Random physical state with no weight on the unobservable Pauli directions.
fn observable_state(rng: &mut impl Rng, set: ChannelSet) -> DensityMatrix {
    let design = build_design_matrix(&FIG2_THETAS, set).unwrap();
    let mut c = pauli_decompose(&random_density(rng)).non_identity();
    for v in &design.null_space {
        let dot: f64 = c.iter().zip(v).map(|(a, b)| a * b).sum();
        c.iter_mut().zip(v).for_each(|(a, b)| *a -= dot * b);
    }
    let mut w = 1.0;
    loop {
        let scaled: Vec<f64> = c.iter().map(|x| x * w).collect();
        let m = pauli_compose(&PauliCoefficients::from_non_identity(0.25, &scaled));
        if let Ok(rho) = DensityMatrix::new(m.hermitian_part()) {
            if rho.min_eigenvalue().unwrap() > 1e-3 {
                return rho;
            }
        }
        w *= 0.8;
    }
}

/// Frobenius projection onto unit-trace PSD matrices: shift the eigenvalues by
/// the water level μ with Σ max(λ−μ, 0) = 1.
fn water_filling(m: &ComplexMatrix) -> ComplexMatrix {
    let eig = m.hermitian_part().eigh().unwrap();
    let mut lam: Vec<f64> = eig.values.iter().copied().collect();
    lam.sort_by(|a, b| b.total_cmp(a));
    let mut mu = 0.0;
    for k in 1..=lam.len() {
        let cand = (lam[..k].iter().sum::<f64>() - 1.0) / k as f64;
        if lam[k - 1] - cand > 0.0 {
            mu = cand;
        }
    }
    eig.reconstruct_with(|v| (v - mu).max(0.0))
}

#[test]
fn bell_identity_resolved() {
    let r = 1.15 * PI;
    let res = tomo_pipeline(&exact_scans(&bell_state(r), &FIG2_THETAS, true), &TomoOptions::default()).unwrap();
    assert_eq!(res.diagnostics.channels, ChannelSet::Resolved);
    assert_eq!(res.diagnostics.rank, 12);
    assert_eq!(res.null_space_dims, 3);
    assert!(1.0 - res.report.fidelity <= 1e-6, "F = {}", res.report.fidelity);
    assert!((res.report.best_r - r).abs() < 1e-6, "r = {}", res.report.best_r);
    assert!(res.cost >= 0.0 && res.cost < 1e-10);
}

#[test]
fn bell_corners_pooled() {
    for r in [0.0, 0.7, 1.15 * PI] {
        let res = tomo_pipeline(&exact_scans(&bell_state(r), &FIG2_THETAS, false), &TomoOptions::default()).unwrap();
        assert_eq!(res.diagnostics.channels, ChannelSet::Pooled);
        assert_eq!(res.diagnostics.rank, 9);
        assert!((res.rho_m[(0, 3)] - bell_state(r).corner()).norm() < 1e-8);
        assert!(1.0 - res.report.fidelity <= 1e-6);
    }
}

#[test]
fn observable_states_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for set in [ChannelSet::Resolved, ChannelSet::Pooled] {
        for _ in 0..10 {
            let rho = observable_state(&mut rng, set);
            let res = tomo_pipeline(&exact_scans(&rho, &FIG2_THETAS, set == ChannelSet::Resolved), &TomoOptions::default())
                .unwrap();
            assert!(res.rho_m.max_abs_diff(rho.matrix()) < 1e-8);
            assert!((res.rho_p.matrix() - rho.matrix()).frobenius_norm() < 1e-6);
        }
    }
}

#[test]
fn maximally_mixed_input() {
    let rho = DensityMatrix::maximally_mixed();
    let res = tomo_pipeline(&exact_scans(&rho, &FIG2_THETAS, false), &TomoOptions::default()).unwrap();
    assert!(res.rho_m.max_abs_diff(rho.matrix()) < 1e-10);
    assert!((res.report.fidelity - 0.25).abs() < 1e-8);
}

#[test]
fn noisy_maximally_mixed_input() {
    let rho = DensityMatrix::maximally_mixed();
    let spec = |seed| ScanSpec { readout: ReadoutModel::IDEAL, ..ScanSpec::new(500, seed) };
    let scans: Vec<ScanData> = FIG2_THETAS
        .iter()
        .enumerate()
        .map(|(i, &t)| phi_scan_of_state(&rho, t, &uniform_phis(36), &spec(i as u64)).unwrap())
        .collect();
    let res = tomo_pipeline(&scans, &TomoOptions::default()).unwrap();
    assert!((res.report.fidelity - 0.25).abs() < 0.05, "F = {}", res.report.fidelity);
}

#[test]
fn identical_counts_do_not_crash() {
    let mut scans = exact_scans(&DensityMatrix::maximally_mixed(), &FIG2_THETAS, false);
    for s in &mut scans {
        s.metadata.exact = false;
        for r in &mut s.records {
            r.exact = None;
            (r.n_uu, r.n_mid, r.n_dd, r.n_shots) = (100, 100, 100, 300);
        }
    }
    let res = tomo_pipeline(&scans, &TomoOptions::default()).unwrap();
    assert!(res.report.fidelity.is_finite());
    assert!(res.report.fidelity + 1e-9 >= 2.0 * res.report.coherence().norm());
}

#[test]
fn pipeline_needs_two_thetas() {
    let scans = exact_scans(&bell_state(0.0), &[FIG2_THETAS[0]], false);
    assert!(matches!(tomo_pipeline(&scans, &TomoOptions::default()), Err(spinforge::Error::InsufficientData(_))));
    let two = exact_scans(&bell_state(0.0), &[FIG2_THETAS[0], FIG2_THETAS[0]], false);
    assert!(tomo_pipeline(&two, &TomoOptions::default()).is_err());
    let forced = TomoOptions { channels: ChannelChoice::Resolved, readout: None };
    let pooled = exact_scans(&bell_state(0.0), &FIG2_THETAS, false);
    assert!(matches!(tomo_pipeline(&pooled, &forced), Err(spinforge::Error::InputMismatch(_))));
}

#[test]
fn rank_never_exceeds_twelve() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let t1 = rng.random_range(0.1 * PI..0.9 * PI);
        let t2 = rng.random_range(0.1 * PI..0.9 * PI);
        if (t1 - t2).abs() < 1e-3 {
            continue;
        }
        assert_eq!(build_design_matrix(&[t1, t2], ChannelSet::Resolved).unwrap().rank, 12);
        assert_eq!(build_design_matrix(&[t1, t2], ChannelSet::Pooled).unwrap().rank, 9);
        let three = rng.random_range(0.1 * PI..0.9 * PI);
        assert!(build_design_matrix(&[t1, t2, three], ChannelSet::Resolved).unwrap().rank <= 12);
    }
}

#[test]
fn invert_rejects_mismatched_thetas() {
    let scans = exact_scans(&bell_state(0.0), &FIG2_THETAS, false);
    let fits: Vec<_> = scans.iter().map(|s| fit_phi_harmonics(s, ChannelSet::Pooled, None).unwrap()).collect();
    let design = build_design_matrix(&[0.5 * PI, 0.66 * PI], ChannelSet::Pooled).unwrap();
    assert!(matches!(invert_to_rho_m(&fits, &design), Err(spinforge::Error::InputMismatch(_))));
}

#[test]
fn harmonic_examples() {
    let down = DensityMatrix::basis(DD);
    let fit = fit_phi_harmonics(&exact_scans(&down, &[FRAC_PI_2], false)[0], ChannelSet::Pooled, None).unwrap();
    let uu = fit.channel(Channel::Uu).unwrap().coeffs;
    // sin⁴(θ/2) at θ = π/2
    assert!((uu[0] - (FRAC_PI_2 / 2.0).sin().powi(4)).abs() < 1e-9);
    assert!(uu[1..].iter().all(|c| c.abs() < 1e-9));

    for r in [0.0, 1.0, 1.15 * PI] {
        let fit = fit_phi_harmonics(&exact_scans(&bell_state(r), &[FRAC_PI_2], false)[0], ChannelSet::Pooled, None)
            .unwrap();
        assert!((fit.channel(Channel::Uu).unwrap().second_harmonic_amplitude() - 0.25).abs() < 1e-9);
        for ch in &fit.channels {
            for &phi in &uniform_phis(36) {
                assert!((-0.1..=1.1).contains(&ch.model(phi)));
            }
        }
    }
}

#[test]
fn harmonic_fit_errors_are_calibrated() {
    let phis = uniform_phis(36);
    let sigma = 0.02;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut covered = 0;
    for _ in 0..100 {
        let vals: Vec<f64> = phis.iter().map(|_| 0.4 + sigma * rng.sample::<f64, _>(StandardNormal)).collect();
        let (c, se, _) = fit_harmonics(&phis, &vals, &vec![sigma * sigma; phis.len()]).unwrap();
        if (c[0] - 0.4).abs() <= 3.0 * se[0] {
            covered += 1;
        }
    }
    assert!(covered >= 99, "{covered}/100");
}

#[test]
fn harmonic_fit_needs_five_angles() {
    let phis = [0.0, 1.0, 2.0, 3.0];
    assert!(matches!(fit_harmonics(&phis, &[0.0; 4], &[0.0; 4]), Err(spinforge::Error::InsufficientData(_))));
    let dup = [0.0, 1.0, 2.0, 3.0, 0.0, TAU];
    assert!(fit_harmonics(&dup, &[0.0; 6], &[0.0; 6]).is_err());
}

#[test]
fn ml_water_filling_oracle() {
    let m = ComplexMatrix::from_diagonal(&[1.1, 0.0, 0.0, -0.1].map(|x| C64::new(x, 0.0)));
    let proj = ml_project(&m).unwrap();
    let expect = ComplexMatrix::from_diagonal(&[1.0, 0.0, 0.0, 0.0].map(|x| C64::new(x, 0.0)));
    assert!(proj.rho_p.matrix().max_abs_diff(&expect) < 1e-4);
    assert!(water_filling(&m).max_abs_diff(&expect) < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let rho = random_density(&mut rng);
        let noise = DMatrix::from_fn(4, 4, |_, _| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)));
        let h = ComplexMatrix::from_dmatrix((&noise + noise.adjoint()) * C64::new(0.1, 0.0)).unwrap();
        let tr = h.trace().re / 4.0;
        let m = &(rho.matrix() + &h) - &ComplexMatrix::identity(4).scale(C64::new(tr, 0.0));
        let oracle = water_filling(&m);
        let proj = ml_project(&m).unwrap();
        assert!(proj.rho_p.matrix().max_abs_diff(&oracle) < 1e-4);
        let oracle_cost = (&oracle - &m.hermitian_part()).frobenius_norm().powi(2);
        assert!(proj.cost <= oracle_cost + 1e-8);
        assert!(proj.starts.iter().all(|s| proj.cost <= s.initial_cost));
    }
}

#[test]
fn ml_keeps_physical_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let rho = random_density(&mut rng);
        let proj = ml_project(rho.matrix()).unwrap();
        assert!(proj.rho_p.max_abs_diff(&rho) < 1e-6);
        assert!(proj.cost < 1e-10);
    }
}

#[test]
fn noisy_bell_reconstruction() {
    let truth = DensityMatrix::mix(&bell_state(1.15 * PI), &DensityMatrix::maximally_mixed(), 0.8).unwrap();
    let f_true = bell_fidelity(&truth).0;
    for seed in 0..50u64 {
        let scans: Vec<ScanData> = FIG2_THETAS
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let spec = ScanSpec { readout: ReadoutModel::IDEAL, ..ScanSpec::new(500, seed * 2 + i as u64) };
                phi_scan_of_state(&truth, t, &uniform_phis(36), &spec).unwrap()
            })
            .collect();
        let res = tomo_pipeline(&scans, &TomoOptions::default()).unwrap();
        assert!((res.report.fidelity - f_true).abs() < 0.05, "seed {seed}: {} vs {f_true}", res.report.fidelity);
        assert!(res.report.fidelity + 1e-9 >= 2.0 * res.report.coherence().norm());
        let direct = EntanglementReport::of(&res.rho_p).unwrap();
        assert_eq!(direct.fidelity, res.report.fidelity);
    }
}

#[test]
fn readout_correction_restores_exact_data() {
    let readout = ReadoutModel { p_prep: 1.0, eps_bright: 0.05, eps_dark: 0.03 };
    let rho = bell_state(0.4);
    for resolved in [false, true] {
        let spec = ScanSpec { readout, exact: true, resolved, ..ScanSpec::new(500, 0) };
        let scans: Vec<ScanData> =
            FIG2_THETAS.iter().map(|&t| phi_scan_of_state(&rho, t, &uniform_phis(36), &spec).unwrap()).collect();
        let raw = tomo_pipeline(&scans, &TomoOptions::default()).unwrap();
        assert!(raw.report.fidelity < 0.95);
        let opts = TomoOptions { readout: Some(readout), ..TomoOptions::default() };
        let corrected = tomo_pipeline(&scans, &opts).unwrap();
        assert!(corrected.diagnostics.readout_corrected);
        assert!(1.0 - corrected.report.fidelity < 1e-6);
    }
}

fn parity_coeffs(values: &[f64], phis: &[f64]) -> [f64; 5] {
    fit_harmonics(phis, values, &vec![0.0; values.len()]).unwrap().0
}

#[test]
fn frequency_two_is_drift_immune() {
    // ±5 % linear drift of the detected signal across the scan, in acquisition order
    let phis = uniform_phis(36);
    let n = phis.len();
    let drift: Vec<f64> = (0..n).map(|k| 1.0 + 0.05 * (2.0 * k as f64 / (n - 1) as f64 - 1.0)).collect();
    for r in [0.0, 0.5, 1.15 * PI, 1.7 * PI] {
        for theta in [0.46 * PI, FRAC_PI_2, 0.54 * PI] {
            let scan = &exact_scans(&bell_state(r), &[theta], false)[0];
            let parity: Vec<f64> = scan
                .records
                .iter()
                .map(|rec| spinforge::measurement::parity_signal(&rec.frequencies()))
                .collect();
            let drifted: Vec<f64> = parity.iter().zip(&drift).map(|(p, d)| p * d).collect();
            let c0 = parity_coeffs(&parity, &phis);
            let c1 = parity_coeffs(&drifted, &phis);
            let amp = c0[3].hypot(c0[4]);
            assert!((c1[3] - c0[3]).abs() < 0.01 * amp && (c1[4] - c0[4]).abs() < 0.01 * amp, "r={r} θ={theta}");
            assert!((c1[3].hypot(c1[4]) - amp).abs() < 0.01 * amp);
            let mean_drift = drift.iter().sum::<f64>() / n as f64 - 1.0;
            assert!((c1[0] - c0[0] * (1.0 + mean_drift)).abs() <= 0.05 * c0[0].abs().max(amp));
        }
    }
}

#[test]
fn parity_examples() {
    for r in [0.0, 2.0] {
        let b = coherence_from_parity(&exact_scans(&bell_state(r), &[FRAC_PI_2], false)[0], None).unwrap();
        assert!((b.abs_c - 0.5).abs() < 1e-9 && (b.f_lower_bound - 1.0).abs() < 1e-9);
        let off = coherence_from_parity(&exact_scans(&bell_state(r), &[0.46 * PI], false)[0], None).unwrap();
        assert!((off.f_lower_bound - 1.0).abs() < 1e-9);
    }
    let mixed = coherence_from_parity(&exact_scans(&DensityMatrix::maximally_mixed(), &[FRAC_PI_2], false)[0], None)
        .unwrap();
    assert!(mixed.abs_c < 1e-12 && mixed.f_lower_bound < 1e-12);
    let far = &exact_scans(&bell_state(0.0), &[0.3 * PI], false)[0];
    assert!(coherence_from_parity(far, None).is_err());
}

fn model_truth() -> EchoModelParams {
    EchoModelParams { gamma: 5.4e3, delta: TAU * 12.6e3, omega_f: TAU * 23e3, delta_c: 2.0e3 }
}

fn model_scan(p: &EchoModelParams, shots: u64, seed: Option<u64>) -> ScanData {
    use spinforge::measurement::{ScanMetadata, ScanRecord, Setting};
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let records = (0..100)
        .map(|k| {
            let tau = 200e-6 * k as f64 / 99.0;
            let (uu, mid) = p.populations(tau, 0.0, false).unwrap();
            let dd = 1.0 - uu - mid;
            let (counts, exact) = match rng.as_mut() {
                Some(rng) => {
                    let c = spinforge::measurement::sample_multinomial([uu, mid, dd], shots, rng).unwrap();
                    (c, None)
                }
                None => ([0, 0, shots], Some([uu, mid / 2.0, mid / 2.0, dd])),
            };
            ScanRecord {
                setting: Setting::Tau { tau_s: tau },
                n_uu: counts[0],
                n_mid: counts[1],
                n_dd: counts[2],
                n_shots: shots,
                split: None,
                exact,
            }
        })
        .collect();
    ScanData::new(ScanMetadata { exact: seed.is_none(), ..ScanMetadata::default() }, records).unwrap()
}

#[test]
fn model_noiseless_recovery() {
    let truth = model_truth();
    let scan = model_scan(&truth, 500, None);
    let t = [truth.gamma, truth.delta, truth.omega_f, truth.delta_c];
    // δ and Ω_f move together: opposite 20 % shifts reach other local minima
    for signs in 0..8u32 {
        let f: Vec<f64> = [0, 1, 1, 2].iter().map(|&k| if signs >> k & 1 == 1 { 1.2 } else { 0.8 }).collect();
        let guess = EchoModelParams { gamma: t[0] * f[0], delta: t[1] * f[1], omega_f: t[2] * f[2], delta_c: t[3] * f[3] };
        let fit = fit_eq4(&scan, &guess, &EchoModelFitOptions::default()).unwrap();
        let got = [fit.params.gamma, fit.params.delta, fit.params.omega_f, fit.params.delta_c];
        for k in 0..4 {
            assert!((got[k] - t[k]).abs() < 1e-3 * t[k], "start {f:?}: {got:?}");
        }
    }
}

#[test]
fn model_noisy_gamma_recovery() {
    let truth = EchoModelParams { delta_c: 0.0, ..model_truth() };
    let guess = EchoModelParams { gamma: 4e3, delta: TAU * 13e3, omega_f: TAU * 21e3, delta_c: 500.0 };
    let good = (0..50u64)
        .filter(|&seed| {
            let fit = fit_eq4(&model_scan(&truth, 500, Some(seed)), &guess, &EchoModelFitOptions::default()).unwrap();
            (fit.params.gamma - truth.gamma).abs() <= 0.2 * truth.gamma
        })
        .count();
    assert!(good >= 45, "{good}/50");
}

#[test]
fn model_null_gamma() {
    let truth = EchoModelParams { gamma: 0.0, delta_c: 0.0, ..model_truth() };
    let guess = EchoModelParams { gamma: 1e3, delta: TAU * 13e3, omega_f: TAU * 22e3, delta_c: 300.0 };
    let fit = fit_eq4(&model_scan(&truth, 500, Some(17)), &guess, &EchoModelFitOptions::default()).unwrap();
    assert!(fit.params.gamma <= 3.0 * fit.std_err[0] + 1e-9, "{} ± {}", fit.params.gamma, fit.std_err[0]);
}

#[test]
fn model_input_checks() {
    let truth = model_truth();
    let scan = model_scan(&truth, 500, None);
    let short = ScanData::new(scan.metadata.clone(), scan.records[..10].to_vec()).unwrap();
    assert!(matches!(fit_eq4(&short, &truth, &EchoModelFitOptions::default()), Err(spinforge::Error::InsufficientData(_))));
    let narrow = ScanData::new(scan.metadata.clone(), scan.records[..30].to_vec()).unwrap();
    assert!(matches!(fit_eq4(&narrow, &truth, &EchoModelFitOptions::default()), Err(spinforge::Error::InsufficientData(_))));
}
