use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use spinforge::trap_physics::{
    carrier_light_shift, ion_separation, mode_frequencies, CA40_MASS, ELEMENTARY_CHARGE, EPSILON_0,
};

/// Axial potential energy of two ions at ±x/2 in a harmonic well.
fn two_ion_energy(mass: f64, omega_c: f64, x: f64) -> f64 {
    let k = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (4.0 * PI * EPSILON_0);
    mass * omega_c * omega_c * x * x / 4.0 + k / x
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

#[test]
fn separation_minimizes_potential() {
    for f_hz in [200e3, 500e3, 536.5e3, 1.2e6] {
        let omega_c = TAU * f_hz;
        let d = ion_separation(CA40_MASS, omega_c);
        let x = golden_min(|x| two_ion_energy(CA40_MASS, omega_c, x), 0.2 * d, 5.0 * d);
        assert!(((x - d) / d).abs() < 1e-7, "{f_hz}: {x} vs {d}");
    }
}

#[test]
fn stretch_mode_from_hessian() {
    let omega_c = TAU * 500e3;
    let m = CA40_MASS;
    let d = ion_separation(m, omega_c);
    let k = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (4.0 * PI * EPSILON_0);
    // energy of ions at z1, z2; Hessian by central differences around (−d/2, d/2)
    let energy = |z1: f64, z2: f64| 0.5 * m * omega_c * omega_c * (z1 * z1 + z2 * z2) + k / (z2 - z1);
    let h = 1e-4 * d;
    let z = [-d / 2.0, d / 2.0];
    let mut hess = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let at = |si: f64, sj: f64| {
                let mut p = z;
                p[i] += si * h;
                p[j] += sj * h;
                energy(p[0], p[1])
            };
            hess[i][j] = (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h);
        }
    }
    let tr = hess[0][0] + hess[1][1];
    let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
    let disc = (tr * tr / 4.0 - det).sqrt();
    let (lo, hi) = (tr / 2.0 - disc, tr / 2.0 + disc);
    let (wc, ws) = mode_frequencies(omega_c);
    assert!(((lo / m).sqrt() / wc - 1.0).abs() < 1e-5);
    assert!(((hi / m).sqrt() / ws - 1.0).abs() < 1e-5);
}

/// Shift of the dressed transition of `H = (ω0/2)σz + Ω cos(ωt) σx` from the
/// Floquet quasi-energies of one drive period.
fn floquet_shift(omega_0: f64, rabi: f64, omega: f64) -> f64 {
    let period = TAU / omega;
    let steps = 20_000;
    let dt = period / steps as f64;
    let i = C64::new(0.0, 1.0);
    let deriv = |t: f64, v: [C64; 2]| {
        let x = rabi * (omega * t).cos();
        [-i * (0.5 * omega_0 * v[0] + x * v[1]), -i * (x * v[0] - 0.5 * omega_0 * v[1])]
    };
    let mut cols = [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];
    for col in cols.iter_mut() {
        let mut v = *col;
        for s in 0..steps {
            let t = s as f64 * dt;
            let add = |a: [C64; 2], b: [C64; 2], h: f64| [a[0] + b[0] * h, a[1] + b[1] * h];
            let k1 = deriv(t, v);
            let k2 = deriv(t + dt / 2.0, add(v, k1, dt / 2.0));
            let k3 = deriv(t + dt / 2.0, add(v, k2, dt / 2.0));
            let k4 = deriv(t + dt, add(v, k3, dt));
            for c in 0..2 {
                v[c] += (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]) * (dt / 6.0);
            }
        }
        *col = v;
    }
    // eigenvalues of the 2×2 one-period propagator
    let (a, b, c, d) = (cols[0][0], cols[1][0], cols[0][1], cols[1][1]);
    let tr = a + d;
    let disc = (tr * tr / 4.0 - (a * d - b * c)).sqrt();
    let (l1, l2) = (tr / 2.0 + disc, tr / 2.0 - disc);
    let gap = ((-l1.arg() + l2.arg()) / period).rem_euclid(omega);
    // ±gap are equivalent; the dressed transition is the representative closest to ω0
    let nearest = |g: f64| g + ((omega_0 - g) / omega).round() * omega;
    let (a, b) = (nearest(gap), nearest((-gap).rem_euclid(omega)));
    let best = if (a - omega_0).abs() < (b - omega_0).abs() { a } else { b };
    best - omega_0
}

#[test]
fn light_shift_matches_floquet_oracle() {
    for (omega, rabi) in [(0.3, 0.02), (0.55, 0.015), (1.6, 0.03)] {
        let numeric = floquet_shift(1.0, rabi, omega);
        let formula = carrier_light_shift(rabi, 1.0, omega).unwrap();
        assert!(((numeric - formula) / formula).abs() < 0.01, "ω = {omega}: {numeric} vs {formula}");
    }
}
