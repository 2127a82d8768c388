//! Closest physical state `ρ^P = T†T / Tr(T†T)` to a Hermitian estimate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quantum_core::{ComplexMatrix, DensityMatrix};

pub const N_PARAMS: usize = 16;
pub const N_STARTS: usize = 8;
pub const COST_TOL: f64 = 1e-12;
pub const MAX_ITER: usize = 10_000;
const LBFGS_MEMORY: usize = 10;
/// Fixed seed of the perturbed starting points.
const START_SEED: u64 = 0x5eed_0f_57a7;
const PERTURBATION: f64 = 0.1;

/// Lower-triangular `T` from 16 reals: 4 diagonal entries then the real and
/// imaginary parts of the 6 entries below the diagonal, row-major.
pub fn t_from_params(x: &[f64]) -> DMatrix<C64> {
    let mut t = DMatrix::zeros(4, 4);
    for i in 0..4 {
        t[(i, i)] = C64::new(x[i], 0.0);
    }
    let mut k = 4;
    for i in 1..4 {
        for j in 0..i {
            t[(i, j)] = C64::new(x[k], x[k + 1]);
            k += 2;
        }
    }
    t
}

pub fn params_from_t(t: &DMatrix<C64>) -> Vec<f64> {
    let mut x = vec![0.0; N_PARAMS];
    for i in 0..4 {
        x[i] = t[(i, i)].re;
    }
    let mut k = 4;
    for i in 1..4 {
        for j in 0..i {
            x[k] = t[(i, j)].re;
            x[k + 1] = t[(i, j)].im;
            k += 2;
        }
    }
    x
}

pub fn rho_from_t(t: &DMatrix<C64>) -> DMatrix<C64> {
    let a = t.adjoint() * t;
    let tr = a.trace().re;
    a / C64::new(tr, 0.0)
}

/// `‖T†T/Tr − M‖²_F` and its gradient in the 16 parameters.
pub fn cost_and_gradient(x: &[f64], target: &DMatrix<C64>) -> (f64, Vec<f64>) {
    let t = t_from_params(x);
    let a = t.adjoint() * &t;
    let tr = a.trace().re;
    let rho = &a / C64::new(tr, 0.0);
    let diff = &rho - target;
    let cost = diff.iter().map(|z| z.norm_sqr()).sum();
    // dC = Re Tr(H dA) with H = G/t − Re Tr(G A)/t² · I, G = 2(ρ − M); dA = dT†T + T†dT
    let g = &diff * C64::new(2.0, 0.0);
    let gta = (&g * &a).trace().re;
    let mut h = &g / C64::new(tr, 0.0);
    for i in 0..4 {
        h[(i, i)] -= C64::new(gta / (tr * tr), 0.0);
    }
    let ht = &h * t.adjoint();
    // ∂C/∂Re T_ab = 2 Re (HT†)_ba, ∂C/∂Im T_ab = −2 Im (HT†)_ba
    let mut grad = vec![0.0; N_PARAMS];
    for i in 0..4 {
        grad[i] = 2.0 * ht[(i, i)].re;
    }
    let mut k = 4;
    for i in 1..4 {
        for j in 0..i {
            grad[k] = 2.0 * ht[(j, i)].re;
            grad[k + 1] = -2.0 * ht[(j, i)].im;
            k += 2;
        }
    }
    (cost, grad)
}

/// Lower-triangular `T` with `T†T = ρ` for positive-definite `ρ`:
/// `T = J L† J` where `J ρ J = L L†` and `J` reverses the basis order.
pub fn t_from_density(rho: &DMatrix<C64>) -> Option<DMatrix<C64>> {
    let n = rho.nrows();
    let flip = |m: &DMatrix<C64>| DMatrix::from_fn(n, n, |i, j| m[(n - 1 - i, n - 1 - j)]);
    let l = flip(rho).cholesky()?.l();
    Some(flip(&l.adjoint()))
}

/// Eigenvalues clipped to `floor`, renormalized.
fn clipped_projection(m: &ComplexMatrix, floor: f64) -> Result<DMatrix<C64>> {
    let eig = m.hermitian_part().eigh()?;
    let clipped = eig.reconstruct_with(|v| v.max(floor));
    let tr = clipped.trace().re;
    Ok(clipped.into_dmatrix() / C64::new(tr, 0.0))
}

#[derive(Clone, Debug)]
pub struct StartResult {
    pub initial_cost: f64,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    params: Vec<f64>,
}

/// Limited-memory BFGS with backtracking Armijo line search; stops when the
/// cost changes by less than [`COST_TOL`] or after [`MAX_ITER`] iterations.
fn lbfgs(x0: Vec<f64>, target: &DMatrix<C64>) -> StartResult {
    let mut x = x0;
    let (mut f, mut g) = cost_and_gradient(&x, target);
    let initial_cost = f;
    let mut s_hist: Vec<DVector<f64>> = Vec::new();
    let mut y_hist: Vec<DVector<f64>> = Vec::new();
    for iter in 1..=MAX_ITER {
        let gv = DVector::from_column_slice(&g);
        if gv.norm() == 0.0 {
            return StartResult { initial_cost, cost: f, iterations: iter, converged: true, params: x };
        }
        // two-loop recursion
        let mut q = gv.clone();
        let mut alphas = Vec::with_capacity(s_hist.len());
        for (s, y) in s_hist.iter().zip(&y_hist).rev() {
            let rho = 1.0 / y.dot(s);
            let a = rho * s.dot(&q);
            q -= y * a;
            alphas.push((a, rho));
        }
        if let (Some(s), Some(y)) = (s_hist.last(), y_hist.last()) {
            q *= s.dot(y) / y.dot(y);
        }
        for ((s, y), (a, rho)) in s_hist.iter().zip(&y_hist).zip(alphas.into_iter().rev()) {
            let b = rho * y.dot(&q);
            q += s * (a - b);
        }
        let mut dir = -q;
        if dir.dot(&gv) >= 0.0 {
            dir = -gv.clone();
            s_hist.clear();
            y_hist.clear();
        }
        let slope = dir.dot(&gv);
        let mut step = 1.0;
        let xv = DVector::from_column_slice(&x);
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &xv + &dir * step;
            let (ft, gt) = cost_and_gradient(trial.as_slice(), target);
            if ft <= f + 1e-4 * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else {
            // no descent possible at working precision
            return StartResult { initial_cost, cost: f, iterations: iter, converged: true, params: x };
        };
        let s = &xn - &xv;
        let y = DVector::from_column_slice(&gn) - &gv;
        if y.dot(&s) > 1e-300 {
            s_hist.push(s);
            y_hist.push(y);
            if s_hist.len() > LBFGS_MEMORY {
                s_hist.remove(0);
                y_hist.remove(0);
            }
        }
        let change = f - fn_;
        x = xn.as_slice().to_vec();
        f = fn_;
        g = gn;
        if change.abs() < COST_TOL {
            return StartResult { initial_cost, cost: f, iterations: iter, converged: true, params: x };
        }
    }
    StartResult { initial_cost, cost: f, iterations: MAX_ITER, converged: false, params: x }
}

/// Starting parameters: scaled identity, the eigenvalue-clipped estimate, and
/// six fixed-seed perturbations of the latter.
pub fn starting_points(rho_m: &ComplexMatrix) -> Result<Vec<Vec<f64>>> {
    let mut starts = Vec::with_capacity(N_STARTS);
    starts.push(params_from_t(&(DMatrix::identity(4, 4) * C64::new(0.5, 0.0))));
    let proj = clipped_projection(rho_m, 1e-9)?;
    let base = params_from_t(&t_from_density(&proj).ok_or_else(|| {
        Error::NumericalFailure("Cholesky factorization of the clipped estimate".into())
    })?);
    starts.push(base.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    for _ in 0..N_STARTS - 2 {
        starts.push(base.iter().map(|v| v + PERTURBATION * rng.random_range(-1.0..1.0)).collect());
    }
    Ok(starts)
}

#[derive(Clone, Debug)]
pub struct MlProjection {
    pub rho_p: DensityMatrix,
    pub cost: f64,
    /// Index of the winning start.
    pub start: usize,
    pub starts: Vec<StartResult>,
}

/// Minimizes `Σ |ρ^P − ρ^M|²_ij` over physical `ρ^P` from [`N_STARTS`] starts and keeps
/// the lowest cost (ties broken by start index).
pub fn ml_project(rho_m: &ComplexMatrix) -> Result<MlProjection> {
    if rho_m.dim() != 4 {
        return Err(Error::ContractViolation("ML projection expects a 4x4 matrix".into()));
    }
    let target = rho_m.hermitian_part().into_dmatrix();
    let starts: Vec<StartResult> = starting_points(rho_m)?.into_iter().map(|x0| lbfgs(x0, &target)).collect();
    let (best, winner) = starts
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cost.total_cmp(&b.1.cost).then(a.0.cmp(&b.0)))
        .expect("at least one start");
    let rho = rho_from_t(&t_from_params(&winner.params));
    let rho_p = DensityMatrix::new(ComplexMatrix::from_dmatrix(rho.clone())?.hermitian_part())?;
    if !starts.iter().any(|s| s.converged) {
        return Err(Error::ReconstructionFailure {
            starts: starts.len(),
            best_cost: winner.cost,
            best: Box::new(ComplexMatrix::from_dmatrix(rho)?),
        });
    }
    Ok(MlProjection { rho_p, cost: winner.cost, start: best, starts })
}
