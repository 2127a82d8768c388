//! Levenberg–Marquardt nonlinear least squares with a finite-difference Jacobian.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Converged when an accepted step changes the cost by less than this fraction.
    pub rel_tol: f64,
    pub initial_lambda: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iter: 500, rel_tol: 1e-10, initial_lambda: 1e-3, fd_step: 1e-7 }
    }
}

#[derive(Clone, Debug)]
pub struct LmResult {
    pub params: DVector<f64>,
    pub residuals: DVector<f64>,
    /// `Σ r²`.
    pub cost: f64,
    pub jacobian: DMatrix<f64>,
    pub iterations: usize,
    /// Cost after every iteration.
    pub trace: Vec<f64>,
}

/// Central-difference Jacobian of `f` at `x`.
pub fn numeric_jacobian<F>(f: &F, x: &DVector<f64>, rel_step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let r0 = f(x)?;
    let mut jac = DMatrix::zeros(r0.len(), x.len());
    for j in 0..x.len() {
        let h = rel_step * x[j].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let col = (f(&xp)? - f(&xm)?) / (2.0 * h);
        jac.set_column(j, &col);
    }
    Ok(jac)
}

/// Minimizes `Σ f(x)²` from `x0`.
///
/// Steps solve `(JᵀJ + λ D) δ = −Jᵀr` with `D` the running maximum of
/// `diag JᵀJ` over the iterations; λ shrinks tenfold on success and
/// grows tenfold on failure. Stops when an accepted step changes the cost by less
/// than `rel_tol` relative, when the cost reaches zero, or when λ can no longer
/// produce a decrease (a stationary point). Running out of iterations is a
/// [`Error::FitFailure`].
pub fn levenberg_marquardt<F>(f: F, x0: DVector<f64>, opts: &LmOptions) -> Result<LmResult>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let mut x = x0;
    let mut r = f(&x)?;
    let mut cost = r.norm_squared();
    if !cost.is_finite() {
        return Err(Error::NumericalFailure("non-finite residuals at the initial guess".into()));
    }
    let mut lambda = opts.initial_lambda;
    let mut trace = vec![cost];
    let mut jac = numeric_jacobian(&f, &x, opts.fd_step)?;
    let mut scale: DVector<f64> = DVector::from_element(x.len(), 1e-12);
    for iter in 1..=opts.max_iter {
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        for i in 0..x.len() {
            scale[i] = scale[i].max(jtj[(i, i)]);
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += lambda * scale[i];
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let trial = &x + &step;
            let r_trial = f(&trial)?;
            let c_trial = r_trial.norm_squared();
            if c_trial.is_finite() && c_trial < cost {
                let rel = (cost - c_trial) / cost;
                x = trial;
                r = r_trial;
                cost = c_trial;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                trace.push(cost);
                if rel < opts.rel_tol || cost == 0.0 {
                    let jacobian = numeric_jacobian(&f, &x, opts.fd_step)?;
                    return Ok(LmResult { params: x, residuals: r, cost, jacobian, iterations: iter, trace });
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no direction lowers the cost: stationary to working precision
            trace.push(cost);
            return Ok(LmResult { params: x, residuals: r, cost, jacobian: jac, iterations: iter, trace });
        }
        jac = numeric_jacobian(&f, &x, opts.fd_step)?;
    }
    Err(Error::FitFailure { iterations: opts.max_iter, cost, trace })
}
