//! Truncated Fock-space propagation of the driven stretch mode.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::trap_physics::ForcePulseParams;

/// Maximum probability allowed beyond the Fock cutoff.
pub const TRUNCATION_TOL: f64 = 1e-6;

/// Default number of integrator steps per `min(2π/|δ|, 2π/Ω_f)`.
pub const DEFAULT_STEPS_PER_PERIOD: u32 = 400;

/// Thermal motional state, Boltzmann weights `∝ (n̄/(n̄+1))^n` renormalized over `dim` levels.
pub fn thermal_motional_state(nbar: f64, dim: usize) -> Result<DMatrix<C64>> {
    Ok(DMatrix::from_diagonal(&DVector::from_iterator(
        dim,
        thermal_populations(nbar, dim)?.into_iter().map(|p| C64::new(p, 0.0)),
    )))
}

pub fn thermal_populations(nbar: f64, dim: usize) -> Result<Vec<f64>> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::ContractViolation(format!("n̄ = {nbar} must be ≥ 0")));
    }
    if dim == 0 {
        return Err(Error::ContractViolation("Fock dimension must be positive".into()));
    }
    let x = nbar / (nbar + 1.0);
    let lost = x.powi(dim as i32);
    if lost > TRUNCATION_TOL {
        return Err(Error::Truncation(format!(
            "thermal state with n̄ = {nbar} loses {lost:.3e} beyond {dim} Fock levels"
        )));
    }
    let mut p: Vec<f64> = (0..dim).map(|n| x.powi(n as i32)).collect();
    let norm: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= norm);
    Ok(p)
}

/// `−i H_m(t) U` with `H_m(t) = (m Ω_f/2)(a e^{−iδt} + a† e^{iδt})`, using the
/// banded structure of `a` and `a†`.
fn rhs(u: &DMatrix<C64>, coupling: f64, delta: f64, t: f64, sqrt_n: &[f64]) -> DMatrix<C64> {
    let dim = u.nrows();
    let e = C64::from_polar(coupling, -delta * t);
    let e_dag = e.conj();
    let mi = C64::new(0.0, -1.0);
    DMatrix::from_fn(dim, dim, |n, j| {
        // (a U)[n] = √(n+1) U[n+1]; (a† U)[n] = √n U[n−1]
        let mut acc = C64::new(0.0, 0.0);
        if n + 1 < dim {
            acc += e * sqrt_n[n + 1] * u[(n + 1, j)];
        }
        if n > 0 {
            acc += e_dag * sqrt_n[n] * u[(n - 1, j)];
        }
        mi * acc
    })
}

/// Motional propagator for spin eigenvalue `m` over one force pulse, by
/// fixed-step fourth-order Runge–Kutta with step `≤ min(2π/|δ|, 2π/Ω_f) / steps_per_period`,
/// projected onto the nearest unitary.
pub fn branch_propagator(
    m: f64,
    params: &ForcePulseParams,
    dim: usize,
    steps_per_period: u32,
) -> DMatrix<C64> {
    let coupling = 0.5 * m * params.omega_f;
    if coupling == 0.0 || params.tau == 0.0 {
        return DMatrix::identity(dim, dim);
    }
    let mut period = TAU / params.delta.abs();
    if params.omega_f != 0.0 {
        period = period.min(TAU / params.omega_f.abs());
    }
    let h_max = period / steps_per_period.max(1) as f64;
    let steps = (params.tau / h_max).ceil().max(1.0) as usize;
    let h = params.tau / steps as f64;
    let sqrt_n: Vec<f64> = (0..dim).map(|n| (n as f64).sqrt()).collect();
    let half = C64::new(0.5 * h, 0.0);
    let full = C64::new(h, 0.0);
    let sixth = C64::new(h / 6.0, 0.0);
    let two = C64::new(2.0, 0.0);
    let mut u = DMatrix::<C64>::identity(dim, dim);
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = rhs(&u, coupling, params.delta, t, &sqrt_n);
        let k2 = rhs(&(&u + &k1 * half), coupling, params.delta, t + 0.5 * h, &sqrt_n);
        let k3 = rhs(&(&u + &k2 * half), coupling, params.delta, t + 0.5 * h, &sqrt_n);
        let k4 = rhs(&(&u + &k3 * full), coupling, params.delta, t + h, &sqrt_n);
        u += (k1 + (k2 + k3) * two + k4) * sixth;
    }
    nearest_unitary(u)
}

/// Polar projection `W V†` of `U = W Σ V†`; removes the small norm loss of
/// explicit Runge–Kutta on an oscillatory problem.
fn nearest_unitary(u: DMatrix<C64>) -> DMatrix<C64> {
    let svd = u.svd(true, true);
    match (svd.u, svd.v_t) {
        (Some(w), Some(v_t)) => w * v_t,
        _ => unreachable!("SVD computed with both factors"),
    }
}

/// `⟨a⟩` and the global phase `arg⟨0|U|0⟩` after driving the ground state
/// of the `m = +1` branch.
///
/// For a displaced ground state `e^{iΦ}|α⟩`, `⟨0|e^{iΦ}|α⟩ = e^{iΦ} e^{−|α|²/2}`,
/// so the argument of the vacuum amplitude is the accumulated phase.
pub fn fock_displacement(params: &ForcePulseParams, dim: usize, steps_per_period: u32) -> (C64, f64) {
    let u = branch_propagator(1.0, params, dim, steps_per_period);
    let psi = u.column(0);
    let mut mean_a = C64::new(0.0, 0.0);
    for n in 0..dim - 1 {
        mean_a += psi[n].conj() * psi[n + 1] * ((n + 1) as f64).sqrt();
    }
    (mean_a, psi[0].arg())
}
