//! Levenberg-Marquardt least squares with central-difference Jacobians.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Converged when `|J^T r|` (in scaled units) falls below `grad_tol * cost`.
    pub grad_tol: f64,
    /// Converged when the scaled step falls below this.
    pub step_tol: f64,
    /// Converged when the cost falls below this.
    pub cost_tol: f64,
    /// Relative step of the central differences.
    pub rel_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            grad_tol: 1e-8,
            step_tol: 1e-10,
            cost_tol: 1e-28,
            rel_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// `0.5 * |r|^2`.
    pub cost: f64,
    pub iterations: usize,
    pub residuals: DVector<f64>,
    pub jacobian: DMatrix<f64>,
}

impl LmOutcome {
    pub fn residual_norm(&self) -> f64 {
        self.residuals.norm()
    }

    /// Gauss-Newton covariance `s^2 (J^T J)^-1`; `None` when `J^T J` is singular.
    pub fn covariance(&self) -> Option<DMatrix<f64>> {
        let m = self.residuals.len();
        let n = self.params.len();
        let dof = m.saturating_sub(n).max(1) as f64;
        let s2 = 2.0 * self.cost / dof;
        let jtj = self.jacobian.transpose() * &self.jacobian;
        jtj.try_inverse().map(|inv| inv * s2)
    }

    pub fn uncertainties(&self) -> Vec<f64> {
        match self.covariance() {
            Some(c) => (0..self.params.len()).map(|i| c[(i, i)].max(0.0).sqrt()).collect(),
            None => vec![f64::INFINITY; self.params.len()],
        }
    }
}

/// Central-difference Jacobian; `scale` floors the step for parameters near zero.
pub fn jacobian<F>(f: &F, x: &[f64], scale: &[f64], rel_step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut cols = Vec::with_capacity(x.len());
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = rel_step * x[i].abs().max(scale[i]);
        xp[i] = x[i] + h;
        let up = f(&xp)?;
        xp[i] = x[i] - h;
        let down = f(&xp)?;
        xp[i] = x[i];
        cols.push(DVector::from_iterator(up.len(), up.iter().zip(&down).map(|(a, b)| (a - b) / (2.0 * h))));
    }
    Ok(DMatrix::from_columns(&cols))
}

/// Minimises `0.5 |f(x)|^2` starting at `x0`. `scale` gives the typical size
/// of each parameter and is used for step control and convergence tests.
pub fn levenberg_marquardt<F>(f: F, x0: &[f64], scale: &[f64], opts: &LmOptions) -> Result<LmOutcome>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x0.len();
    assert_eq!(scale.len(), n);
    let mut x = x0.to_vec();
    let mut r = DVector::from_vec(f(&x)?);
    if r.len() < n {
        return Err(Error::DegenerateWindow(format!("{} residuals for {n} parameters", r.len())));
    }
    let mut cost = 0.5 * r.norm_squared();
    let mut lambda = 1e-3;
    let mut j = jacobian(&f, &x, scale, opts.rel_step)?;

    for iter in 0..opts.max_iter {
        let grad = j.transpose() * &r;
        let g_scaled = (0..n).map(|i| (grad[i] * scale[i]).powi(2)).sum::<f64>().sqrt();
        if cost <= opts.cost_tol || g_scaled <= opts.grad_tol * cost {
            return Ok(LmOutcome {
                params: x,
                cost,
                iterations: iter,
                residuals: r,
                jacobian: j,
            });
        }
        let jtj = j.transpose() * &j;
        let dmax = (0..n).map(|i| jtj[(i, i)]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut accepted = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12 * dmax);
            }
            let Some(step) = a.lu().solve(&(-&grad)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = (0..n).map(|i| x[i] + step[i]).collect();
            let step_scaled = (0..n).map(|i| (step[i] / scale[i]).powi(2)).sum::<f64>().sqrt();
            let r_trial = match f(&trial) {
                Ok(v) => DVector::from_vec(v),
                Err(_) => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let c_trial = 0.5 * r_trial.norm_squared();
            if c_trial.is_finite() && c_trial < cost {
                x = trial;
                r = r_trial;
                cost = c_trial;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if step_scaled <= opts.step_tol {
                    let j = jacobian(&f, &x, scale, opts.rel_step)?;
                    return Ok(LmOutcome {
                        params: x,
                        cost,
                        iterations: iter + 1,
                        residuals: r,
                        jacobian: j,
                    });
                }
                break;
            }
            if step_scaled <= opts.step_tol {
                // No downhill step left at machine resolution.
                return Ok(LmOutcome {
                    params: x,
                    cost,
                    iterations: iter,
                    residuals: r,
                    jacobian: j,
                });
            }
            lambda *= 4.0;
        }
        if !accepted {
            return Err(Error::NoConvergence {
                iterations: iter,
                cost,
                best: x,
            });
        }
        j = jacobian(&f, &x, scale, opts.rel_step)?;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        cost,
        best: x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_minimum() {
        let f = |x: &[f64]| Ok(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]);
        let out = levenberg_marquardt(f, &[-1.2, 1.0], &[1.0, 1.0], &LmOptions::default()).unwrap();
        assert!((out.params[0] - 1.0).abs() < 1e-8);
        assert!((out.params[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn linear_fit_covariance_matches_closed_form() {
        // y = a + b t with known residual pattern
        let t: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = t.iter().map(|&t| 2.0 + 0.5 * t + if (t as i32) % 2 == 0 { 0.1 } else { -0.1 }).collect();
        let f = |p: &[f64]| Ok(t.iter().zip(&y).map(|(t, y)| p[0] + p[1] * t - y).collect());
        let out = levenberg_marquardt(f, &[0.0, 0.0], &[1.0, 1.0], &LmOptions::default()).unwrap();
        let n = t.len() as f64;
        let tm = t.iter().sum::<f64>() / n;
        let sxx: f64 = t.iter().map(|t| (t - tm).powi(2)).sum();
        let s2 = 2.0 * out.cost / (n - 2.0);
        let sb = (s2 / sxx).sqrt();
        assert!((out.uncertainties()[1] / sb - 1.0).abs() < 1e-6);
    }
}
