use std::f64::consts::PI;

use proptest::prelude::*;
use spinforge::measurement::{
    apply_readout_errors, generate_phi_scan, outcome_probs, phi_scan_of_state, point_rng, sample_multinomial,
    uniform_phis, OutcomeProbs, ReadoutModel, ScanData, ScanSpec,
};
use spinforge::presets::preset;
use spinforge::quantum_core::{bell_state, DensityMatrix};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

fn json_bytes(s: &ScanData) -> Vec<u8> {
    let mut out = Vec::new();
    s.to_json_writer(&mut out).unwrap();
    out
}

#[test]
fn scans_independent_of_thread_count() {
    let cfg = preset("fig2").unwrap();
    let seq = cfg.sequence().unwrap();
    let spec = cfg.scan_spec().unwrap();
    let phis = uniform_phis(36);
    let runs: Vec<Vec<u8>> = [1, 2, 4, 7]
        .into_iter()
        .map(|n| in_pool(n, || json_bytes(&generate_phi_scan(&seq, 0.54 * PI, &phis, &spec).unwrap())))
        .collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]));

    let reseeded = ScanSpec { seed: spec.seed + 1, ..spec.clone() };
    let other = generate_phi_scan(&seq, 0.54 * PI, &phis, &reseeded).unwrap();
    assert_ne!(json_bytes(&other), runs[0]);
}

#[test]
fn csv_output_is_byte_stable() {
    let mut spec = ScanSpec::new(200, 9);
    spec.resolved = true;
    let scan = phi_scan_of_state(&bell_state(0.3), 0.6 * PI, &uniform_phis(12), &spec).unwrap();
    let write = |s: &ScanData| {
        let mut v = Vec::new();
        s.to_csv_writer(&mut v).unwrap();
        v
    };
    let first = write(&scan);
    let back = ScanData::from_csv_reader(first.as_slice()).unwrap();
    assert_eq!(write(&back), first);
}

/// Mean counts over many seeds stay within 4 standard errors of `N p`, and the
/// per-seed chi-square averages to the number of degrees of freedom.
#[test]
fn sampling_is_unbiased() {
    let probs = [0.52, 0.31, 0.17];
    let (n, reps) = (500u64, 2000u64);
    let mut sums = [0.0; 3];
    let mut chi2 = 0.0;
    for k in 0..reps {
        let counts = sample_multinomial(probs, n, &mut point_rng(77, k)).unwrap();
        assert_eq!(counts.iter().sum::<u64>(), n);
        for i in 0..3 {
            sums[i] += counts[i] as f64;
            let e = n as f64 * probs[i];
            chi2 += (counts[i] as f64 - e).powi(2) / e;
        }
    }
    for i in 0..3 {
        let mean = sums[i] / reps as f64;
        let sd = (n as f64 * probs[i] * (1.0 - probs[i]) / reps as f64).sqrt();
        assert!((mean - n as f64 * probs[i]).abs() < 4.0 * sd, "outcome {i}: {mean}");
    }
    let mean_chi2 = chi2 / reps as f64;
    // E = 2, sd of the mean = 2/√reps
    assert!((mean_chi2 - 2.0).abs() < 4.0 * 2.0 / (reps as f64).sqrt(), "{mean_chi2}");
}

#[test]
fn exact_records_carry_readout_probabilities() {
    let rho = DensityMatrix::basis(0);
    let mut spec = ScanSpec::new(10, 1);
    spec.exact = true;
    let scan = phi_scan_of_state(&rho, 0.0, &uniform_phis(5), &spec).unwrap();
    let want = apply_readout_errors(&outcome_probs(&rho), &spec.readout);
    for r in &scan.records {
        let f = r.frequencies();
        assert!((f.p_uu - want.p_uu).abs() < 1e-12 && (f.p_dd - want.p_dd).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn readout_preserves_normalization(a in 0.0..1.0f64, b in 0.0..1.0f64, eb in 0.0..0.3f64, ed in 0.0..0.3f64) {
        let (uu, mid) = (a * (1.0 - b), b * (1.0 - a));
        let p = OutcomeProbs::new(uu, mid, 1.0 - uu - mid).unwrap();
        let q = apply_readout_errors(&p, &ReadoutModel { p_prep: 1.0, eps_bright: eb, eps_dark: ed });
        prop_assert!((q.p_uu + q.p_mid + q.p_dd - 1.0).abs() < 1e-12);
        prop_assert!(q.as_array().iter().all(|x| *x >= -1e-15));
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), shots in 1u64..2000, theta in 0.0..PI) {
        let scan = phi_scan_of_state(&bell_state(1.0), theta, &uniform_phis(8), &ScanSpec::new(shots, seed)).unwrap();
        let back = ScanData::from_json_reader(json_bytes(&scan).as_slice()).unwrap();
        prop_assert_eq!(back, scan);
    }
}
