//! Damped Gauss-Newton (Levenberg-Marquardt) for small bound-constrained
//! least-squares problems.

use nalgebra::{DMatrix, DVector};

/// A residual vector `r(x)` with analytic Jacobian and a projection onto the
/// feasible parameter box.
pub(crate) trait LeastSquaresProblem {
    fn n_params(&self) -> usize;
    fn n_residuals(&self) -> usize;
    fn residuals(&self, x: &[f64], out: &mut [f64]);
    fn jacobian(&self, x: &[f64], out: &mut DMatrix<f64>);
    fn project(&self, x: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Stop when an accepted step changes the loss by less than this, relatively.
    pub rel_loss_tol: f64,
    /// Stop when the scaled gradient `max_j |J_j^T r| / (||J_j|| ||r||)`
    /// drops below this.
    pub grad_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 500,
            rel_loss_tol: 1e-10,
            grad_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub x: Vec<f64>,
    pub residuals: Vec<f64>,
    pub jacobian: DMatrix<f64>,
    /// `sum r_i^2`
    pub loss: f64,
    /// `||J^T r||_inf`
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Loss after each accepted step, starting with the initial point.
    pub loss_history: Vec<f64>,
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

pub(crate) fn solve<P: LeastSquaresProblem>(
    problem: &P,
    x0: &[f64],
    options: &SolverOptions,
) -> Solution {
    let n = problem.n_params();
    let m = problem.n_residuals();
    let mut x = x0.to_vec();
    problem.project(&mut x);

    let mut r = vec![0.0; m];
    problem.residuals(&x, &mut r);
    let mut loss = sum_sq(&r);
    let mut jac = DMatrix::zeros(m, n);
    problem.jacobian(&x, &mut jac);

    let mut lambda = 1e-3;
    let mut trial = vec![0.0; n];
    let mut trial_r = vec![0.0; m];
    let mut loss_history = vec![loss];
    let mut converged = false;
    let mut iterations = 0;

    let gradient = |jac: &DMatrix<f64>, r: &[f64]| -> DVector<f64> {
        jac.transpose() * DVector::from_column_slice(r)
    };
    let mut grad = gradient(&jac, &r);
    let scaled = |jac: &DMatrix<f64>, grad: &DVector<f64>, loss: f64| -> f64 {
        let rnorm = loss.sqrt();
        (0..n)
            .map(|j| {
                let cnorm = jac.column(j).norm();
                if cnorm == 0.0 {
                    0.0
                } else {
                    grad[j].abs() / (cnorm * rnorm)
                }
            })
            .fold(0.0, f64::max)
    };

    while iterations < options.max_iterations {
        if loss == 0.0 || scaled(&jac, &grad, loss) < options.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let jtj = jac.transpose() * &jac;
        let mut accepted = false;
        while lambda < 1e16 {
            let mut damped = jtj.clone();
            for i in 0..n {
                damped[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 4.0;
                continue;
            };
            let step = chol.solve(&(-&grad));
            for i in 0..n {
                trial[i] = x[i] + step[i];
            }
            problem.project(&mut trial);
            problem.residuals(&trial, &mut trial_r);
            let trial_loss = sum_sq(&trial_r);
            if trial_loss < loss {
                accepted = true;
                let rel = (loss - trial_loss) / loss;
                std::mem::swap(&mut x, &mut trial);
                std::mem::swap(&mut r, &mut trial_r);
                loss = trial_loss;
                loss_history.push(loss);
                problem.jacobian(&x, &mut jac);
                grad = gradient(&jac, &r);
                lambda = (lambda / 3.0).max(1e-15);
                if rel < options.rel_loss_tol {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // no descent direction left at machine precision
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }

    Solution {
        gradient_norm: grad.amax(),
        x,
        residuals: r,
        jacobian: jac,
        loss,
        iterations,
        converged,
        loss_history,
    }
}
