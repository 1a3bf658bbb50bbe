//! Damped Gauss-Newton for small square, under- and over-determined
//! systems. Steps use the SVD pseudo-inverse so rank-deficient Jacobians
//! (solution manifolds, tangential roots) are handled without special cases.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct GaussNewtonOptions {
    pub max_iter: usize,
    /// Singular values below `rank_rtol * s_max` are dropped from the step.
    pub rank_rtol: f64,
    /// Residual norm regarded as a solution.
    pub ftol: f64,
}

impl Default for GaussNewtonOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            rank_rtol: 1e-10,
            ftol: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GaussNewtonResult {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// A residual system `r(x)` with its Jacobian.
pub trait Residuals {
    fn n_residuals(&self) -> usize;
    fn n_unknowns(&self) -> usize;
    fn eval(&self, x: &[f64], r: &mut [f64]);
    fn jacobian(&self, x: &[f64], j: &mut DMatrix<f64>);
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Minimize `|r(x)|` from `x0`. Iterates until the residual stops
/// decreasing, so tangential (double) roots are still approached as
/// closely as floating point allows.
pub fn gauss_newton<R: Residuals + ?Sized>(
    sys: &R,
    x0: &[f64],
    opts: &GaussNewtonOptions,
) -> GaussNewtonResult {
    let m = sys.n_residuals();
    let n = sys.n_unknowns();
    let mut x = x0.to_vec();
    let mut r = vec![0.0; m];
    let mut trial_r = vec![0.0; m];
    let mut jac = DMatrix::zeros(m, n);
    sys.eval(&x, &mut r);
    let mut f = norm(&r);
    let mut iterations = 0;

    while iterations < opts.max_iter && f > 0.0 {
        iterations += 1;
        sys.jacobian(&x, &mut jac);
        let svd = jac.clone().svd(true, true);
        let smax = svd.singular_values.max();
        if !(smax > 0.0) {
            break;
        }
        let rhs = DVector::from_column_slice(&r);
        let step = match svd.solve(&rhs, opts.rank_rtol * smax) {
            Ok(s) => s,
            Err(_) => break,
        };

        let mut t = 1.0;
        let mut accepted = false;
        let mut trial = vec![0.0; n];
        for _ in 0..40 {
            for i in 0..n {
                trial[i] = x[i] - t * step[i];
            }
            sys.eval(&trial, &mut trial_r);
            let ft = norm(&trial_r);
            if ft < f {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        let moved = t * step.norm();
        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut r, &mut trial_r);
        f = norm(&r);
        let xs = 1.0 + norm(&x);
        if moved <= 1e-16 * xs {
            break;
        }
    }

    GaussNewtonResult {
        converged: f <= opts.ftol,
        residual_norm: f,
        iterations,
        x,
    }
}

/// Number of singular values above `rtol * s_max`.
pub fn numerical_rank(j: &DMatrix<f64>, rtol: f64) -> usize {
    if j.is_empty() {
        return 0;
    }
    let sv = j.singular_values();
    let smax = sv.max();
    if !(smax > 0.0) {
        return 0;
    }
    sv.iter().filter(|&&s| s > rtol * smax).count()
}
