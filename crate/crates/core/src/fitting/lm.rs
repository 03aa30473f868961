// SPDX-License-Identifier: Apache-2.0

//! Levenberg–Marquardt with Marquardt diagonal scaling.

use nalgebra::{DMatrix, DVector};

pub const MAX_ITER: usize = 200;
pub const STEP_TOL: f64 = 1e-10;

pub struct Outcome {
    pub params: Vec<f64>,
    pub converged: bool,
    pub n_iter: usize,
    /// Sum of squared residuals.
    pub ssr: f64,
    pub jacobian: DMatrix<f64>,
}

/// Minimizes |r(p)|². `eval` returns the residual vector (model − data)
/// and its Jacobian; `feasible` rejects trial points outside the model's
/// domain (treated like an uphill step).
pub fn minimize<F, G>(eval: F, p0: &[f64], feasible: G) -> Outcome
where
    F: Fn(&[f64]) -> (DVector<f64>, DMatrix<f64>),
    G: Fn(&[f64]) -> bool,
{
    let n = p0.len();
    let mut p = p0.to_vec();
    let (mut r, mut j) = eval(&p);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut n_iter = 0;
    while n_iter < MAX_ITER && !converged {
        n_iter += 1;
        if cost == 0.0 {
            converged = true;
            break;
        }
        let a = j.transpose() * &j;
        let g = j.transpose() * &r;
        let scale: Vec<f64> = (0..n).map(|i| a[(i, i)].max(1e-300)).collect();
        let mut accepted = false;
        while lambda < 1e20 {
            let mut m = a.clone();
            for i in 0..n {
                m[(i, i)] += lambda * scale[i];
            }
            let Some(chol) = m.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            if !trial.iter().all(|v| v.is_finite()) || !feasible(&trial) {
                lambda *= 10.0;
                continue;
            }
            let (r2, j2) = eval(&trial);
            let c2 = r2.norm_squared();
            if c2.is_finite() && c2 < cost {
                let rel = step
                    .iter()
                    .zip(&trial)
                    .map(|(d, v)| d.abs() / v.abs().max(1e-300))
                    .fold(0.0, f64::max);
                p = trial;
                r = r2;
                j = j2;
                cost = c2;
                lambda = (lambda * 0.1).max(1e-15);
                accepted = true;
                converged = rel < STEP_TOL;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no downhill step even at vanishing step length: stationary
            converged = true;
        }
    }
    Outcome {
        params: p,
        converged,
        n_iter,
        ssr: cost,
        jacobian: j,
    }
}

/// Standard errors s·√diag((JᵀJ)⁻¹) with s² = SSR/(m − n). Singular
/// normal matrices give infinite errors.
pub fn standard_errors(jacobian: &DMatrix<f64>, ssr: f64) -> Vec<f64> {
    let (m, n) = jacobian.shape();
    let s2 = if m > n { ssr / (m - n) as f64 } else { 0.0 };
    let jtj = jacobian.transpose() * jacobian;
    match jtj.clone().try_inverse() {
        Some(inv) if (0..n).all(|i| inv[(i, i)].is_finite() && inv[(i, i)] >= 0.0) => {
            (0..n).map(|i| (s2 * inv[(i, i)]).sqrt()).collect()
        }
        _ => vec![f64::INFINITY; n],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_valley() {
        // residuals (10(y − x²), 1 − x): minimum at (1, 1)
        let eval = |p: &[f64]| {
            let r = DVector::from_vec(vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]]);
            let j = DMatrix::from_row_slice(2, 2, &[-20.0 * p[0], 10.0, -1.0, 0.0]);
            (r, j)
        };
        let out = minimize(eval, &[-1.2, 1.0], |_| true);
        assert!(out.converged);
        assert!((out.params[0] - 1.0).abs() < 1e-8 && (out.params[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn singular_normal_matrix_gives_infinite_errors() {
        let j = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        assert!(standard_errors(&j, 1.0).iter().all(|s| s.is_infinite()));
    }
}
