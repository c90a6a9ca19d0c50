//! Nonlinear least squares: a Nelder–Mead pass to get into the basin,
//! then a damped Gauss–Newton (Levenberg–Marquardt) polish with a
//! central-difference Jacobian.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::simplex::{nelder_mead, SimplexOptions};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParameter {
    pub name: String,
    pub value: f64,
    /// 1σ.
    pub uncertainty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub parameters: Vec<FitParameter>,
    /// Euclidean norm of the final residual vector.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    /// False when the fit did not converge or produced a warning that makes
    /// the parameters suspect.
    pub reliable: bool,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub covariance: Option<DMatrix<f64>>,
}

impl FitReport {
    pub fn get(&self, name: &str) -> Option<&FitParameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn value(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |p| p.value)
    }

    pub fn uncertainty(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |p| p.uncertainty)
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
        self.reliable = false;
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LeastSquaresOptions {
    /// Nelder–Mead iterations before the polish; zero skips the simplex.
    pub simplex_iterations: usize,
    pub max_iterations: usize,
    /// Converged when the relative drop in the sum of squares falls below this.
    pub rel_tol: f64,
    /// ...or the parameter step falls below this (relative to the parameters).
    pub step_tol: f64,
    /// Scale the covariance by the reduced χ² (unknown measurement noise).
    pub scale_covariance: bool,
}

impl Default for LeastSquaresOptions {
    fn default() -> Self {
        Self {
            simplex_iterations: 400,
            max_iterations: 200,
            rel_tol: 1e-10,
            step_tol: 1e-12,
            scale_covariance: true,
        }
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn all_finite(r: &[f64]) -> bool {
    r.iter().all(|v| v.is_finite())
}

fn jacobian<F>(residuals: &F, p: &[f64], m: usize) -> Option<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = p.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut q = p.to_vec();
    for j in 0..n {
        let h = 1e-6 * p[j].abs().max(1e-3);
        q[j] = p[j] + h;
        let up = residuals(&q);
        q[j] = p[j] - h;
        let down = residuals(&q);
        q[j] = p[j];
        if up.len() != m || down.len() != m || !all_finite(&up) || !all_finite(&down) {
            return None;
        }
        for i in 0..m {
            jac[(i, j)] = (up[i] - down[i]) / (2.0 * h);
        }
    }
    Some(jac)
}

/// Minimizes `Σ rᵢ(p)²`. Parameter uncertainties come from `(JᵀJ)⁻¹`,
/// scaled by the reduced χ² when `scale_covariance` is set.
pub fn least_squares<F>(
    residuals: F,
    params0: &[f64],
    names: &[&str],
    opts: LeastSquaresOptions,
) -> Result<FitReport>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    assert_eq!(params0.len(), names.len(), "one name per parameter");
    if !all_finite(params0) {
        return Err(Error::invalid("initial parameters", format!("{params0:?}")));
    }
    let r0 = residuals(params0);
    if !all_finite(&r0) {
        return Err(Error::NonFiniteModel {
            params: params0.to_vec(),
        });
    }
    let m = r0.len();
    let n = params0.len();
    if m == 0 {
        return Err(Error::InsufficientData("no residuals".into()));
    }

    let mut p = params0.to_vec();
    let mut iterations = 0;
    if opts.simplex_iterations > 0 {
        let step: Vec<f64> = p
            .iter()
            .map(|v| if v.abs() > 1e-8 { 0.1 * v } else { 1e-2 })
            .collect();
        let simplex = nelder_mead(
            |x| {
                let r = residuals(x);
                if r.len() != m {
                    f64::NAN
                } else {
                    sum_sq(&r)
                }
            },
            &p,
            &step,
            SimplexOptions {
                max_iterations: opts.simplex_iterations,
                x_tol: 1e-9,
                f_tol: 1e-20,
            },
        );
        if simplex.value.is_finite() {
            p = simplex.x;
        }
        iterations += simplex.iterations;
    }

    let mut r = residuals(&p);
    let mut cost = sum_sq(&r);
    let mut lambda = 1e-3;
    let mut converged = cost == 0.0;
    let mut polish = 0;
    let mut last_jac = None;
    while !converged && polish < opts.max_iterations {
        polish += 1;
        let Some(jac) = jacobian(&residuals, &p, m) else {
            return Err(Error::NonFiniteModel { params: p });
        };
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * DVector::from_column_slice(&r);
        last_jac = Some(jac);
        let mut accepted = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&(-&grad)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rt = residuals(&trial);
            let ct = if rt.len() == m && all_finite(&rt) {
                sum_sq(&rt)
            } else {
                f64::INFINITY
            };
            let step_norm = step.norm();
            let p_norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            if ct <= cost {
                let rel = (cost - ct) / cost.max(f64::MIN_POSITIVE);
                p = trial;
                r = rt;
                cost = ct;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if rel < opts.rel_tol
                    || step_norm <= opts.step_tol * (p_norm + opts.step_tol)
                    || cost == 0.0
                {
                    converged = true;
                }
                break;
            }
            if step_norm <= opts.step_tol * (p_norm + opts.step_tol) {
                converged = true;
                break;
            }
            lambda *= 4.0;
        }
        if !accepted && !converged {
            // no downhill step at any damping: stationary to working precision
            converged = true;
        }
    }
    iterations += polish;

    let jac = match jacobian(&residuals, &p, m) {
        Some(j) => j,
        None => last_jac.ok_or(Error::NonFiniteModel { params: p.clone() })?,
    };
    let jtj = jac.transpose() * &jac;
    let dof = m.saturating_sub(n);
    let scale = if opts.scale_covariance {
        if dof > 0 {
            cost / dof as f64
        } else {
            0.0
        }
    } else {
        1.0
    };
    let covariance = jtj.clone().try_inverse().map(|c| c * scale);
    let mut warnings = Vec::new();
    let uncertainties: Vec<f64> = match &covariance {
        Some(c) => (0..n).map(|i| c[(i, i)].max(0.0).sqrt()).collect(),
        None => {
            warnings.push("singular normal matrix; uncertainties unavailable".to_string());
            vec![f64::NAN; n]
        }
    };
    if !converged {
        warnings.push(format!("no convergence after {iterations} iterations"));
    }
    Ok(FitReport {
        schema_version: crate::SCHEMA_VERSION,
        parameters: names
            .iter()
            .zip(&p)
            .zip(&uncertainties)
            .map(|((name, v), u)| FitParameter {
                name: name.to_string(),
                value: *v,
                uncertainty: *u,
            })
            .collect(),
        residual_norm: cost.sqrt(),
        converged,
        iterations,
        reliable: converged && warnings.is_empty(),
        warnings,
        covariance,
    })
}

/// Fits `y ≈ model(x, p)` with optional per-point σ.
pub fn fit_curve<M>(
    model: M,
    x: &[f64],
    y: &[f64],
    sigma: Option<&[f64]>,
    params0: &[f64],
    names: &[&str],
    opts: LeastSquaresOptions,
) -> Result<FitReport>
where
    M: Fn(f64, &[f64]) -> f64,
{
    if x.len() != y.len() || sigma.is_some_and(|s| s.len() != y.len()) {
        return Err(Error::invalid("data", "x, y and sigma lengths differ"));
    }
    let opts = LeastSquaresOptions {
        scale_covariance: opts.scale_covariance && sigma.is_none(),
        ..opts
    };
    least_squares(
        |p| {
            x.iter()
                .zip(y)
                .enumerate()
                .map(|(i, (xi, yi))| {
                    let w = sigma.map_or(1.0, |s| 1.0 / s[i]);
                    (model(*xi, p) - yi) * w
                })
                .collect()
        },
        params0,
        names,
        opts,
    )
}
