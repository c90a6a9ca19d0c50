use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::lsq::{FitParameter, FitReport};
use super::series::{DataSeries, SeriesX};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxationFit {
    pub schema_version: u32,
    /// `1/T1,dark` in 1/s.
    pub intercept: f64,
    /// `p_ex/C` in units of 1/s per 1/t_rep.
    pub slope: f64,
    /// `None` when the intercept is not positive.
    pub t1_dark_s: Option<f64>,
    pub t1_dark_sigma: Option<f64>,
    pub cyclicity: f64,
    pub cyclicity_sigma: f64,
    pub report: FitReport,
}

const MIN_POINTS: usize = 3;

/// Fits `1/T_SR = 1/T1,dark + p_ex/(C·t_rep)` to spin-relaxation times
/// measured at several repetition times. The model is affine in
/// `1/t_rep`, so this is a weighted linear regression in rate space
/// (weights from `σ_T/T²` when the series has uncertainties, otherwise
/// uniform with the covariance scaled by the residual variance).
pub fn fit_spin_relaxation(data: &DataSeries, p_ex: f64) -> Result<RelaxationFit> {
    data.validate()?;
    let SeriesX::RepetitionTimeS(t_rep) = &data.x else {
        return Err(Error::invalid(
            "series",
            "relaxation fit needs t_rep_s abscissae",
        ));
    };
    if data.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} repetition times, need at least {MIN_POINTS}",
            data.len()
        )));
    }
    if !(p_ex > 0.0 && p_ex <= 1.0) {
        return Err(Error::invalid(
            "p_ex",
            format!("must be in (0, 1], got {p_ex}"),
        ));
    }
    if t_rep.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::invalid(
            "t_rep_s",
            "repetition times must be positive",
        ));
    }
    let x: Vec<f64> = t_rep.iter().map(|t| 1.0 / t).collect();
    let r: Vec<f64> = data.y.iter().map(|t| 1.0 / t).collect();
    let w: Vec<f64> = match &data.sigma {
        Some(s) => s
            .iter()
            .zip(&data.y)
            .map(|(s, t)| (t * t / s).powi(2))
            .collect(),
        None => vec![1.0; data.len()],
    };
    if x.iter().all(|v| (v - x[0]).abs() <= 1e-12 * x[0]) {
        return Err(Error::DegenerateDesign(
            "all repetition times are equal".into(),
        ));
    }

    let mut normal = Matrix2::zeros();
    let mut rhs = Vector2::zeros();
    for ((xi, ri), wi) in x.iter().zip(&r).zip(&w) {
        let row = Vector2::new(1.0, *xi);
        normal += *wi * row * row.transpose();
        rhs += *wi * ri * row;
    }
    let inv = normal
        .try_inverse()
        .ok_or_else(|| Error::DegenerateDesign("singular normal equations".into()))?;
    let beta = inv * rhs;
    let (a, b) = (beta[0], beta[1]);
    let chi2: f64 = x
        .iter()
        .zip(&r)
        .zip(&w)
        .map(|((xi, ri), wi)| wi * (ri - a - b * xi).powi(2))
        .sum();
    let dof = (data.len() - 2) as f64;
    let cov = if data.sigma.is_some() {
        inv
    } else if dof > 0.0 {
        inv * (chi2 / dof)
    } else {
        inv * 0.0
    };
    let (sa, sb) = (cov[(0, 0)].sqrt(), cov[(1, 1)].sqrt());

    let cyclicity = p_ex / b;
    let cyclicity_sigma = p_ex * sb / (b * b);
    let resolved = a > 0.0;
    let (t1, t1_sigma) = if resolved {
        (Some(1.0 / a), Some(sa / (a * a)))
    } else {
        (None, None)
    };
    let param = |name: &str, value: f64, uncertainty: f64| FitParameter {
        name: name.into(),
        value,
        uncertainty,
    };
    let mut parameters = vec![
        param("intercept", a, sa),
        param("slope", b, sb),
        param("cyclicity", cyclicity, cyclicity_sigma),
    ];
    if let (Some(t), Some(s)) = (t1, t1_sigma) {
        parameters.push(param("t1_dark_s", t, s));
    }
    let mut report = FitReport {
        schema_version: crate::SCHEMA_VERSION,
        parameters,
        residual_norm: chi2.sqrt(),
        converged: true,
        iterations: 1,
        reliable: true,
        warnings: Vec::new(),
        covariance: Some(nalgebra::DMatrix::from_iterator(2, 2, cov.iter().cloned())),
    };
    if !resolved {
        report.warn(format!(
            "dark relaxation unresolved: fitted intercept {a:.3e} 1/s is not positive"
        ));
    }
    if !(b > 0.0) {
        report.warn(format!("non-positive pumping slope {b:.3e}"));
    }
    Ok(RelaxationFit {
        schema_version: crate::SCHEMA_VERSION,
        intercept: a,
        slope: b,
        t1_dark_s: t1,
        t1_dark_sigma: t1_sigma,
        cyclicity,
        cyclicity_sigma,
        report,
    })
}
