use serde::{Deserialize, Serialize};

use super::bootstrap::{residual_bootstrap, BootstrapOptions};
use super::lsq::{least_squares, FitReport, LeastSquaresOptions};
use super::series::{DataSeries, SeriesX};
use crate::error::{Error, Result};
use crate::spin_model::{
    CouplingMatrix, CyclicityModel, FieldOrientation, IonCavityParams, TensorPair,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct C0FitOptions {
    /// Also fit the on-resonance Purcell factor.
    #[serde(default)]
    pub fit_purcell: bool,
    #[serde(default)]
    pub bootstrap: Option<BootstrapOptions>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C0Fit {
    pub schema_version: u32,
    pub c0: f64,
    pub c0_sigma: f64,
    pub report: FitReport,
}

const MIN_POINTS: usize = 3;

/// `C(c0, s)` at one data point from the Purcell components at `s = 1`.
/// Defined for any `c0 > 0` so the fit can cross the physical bound.
fn cyclicity(components: &[(f64, f64); 2], c0: f64, scale: f64, model: &CyclicityModel) -> f64 {
    let inv = 1.0 / c0;
    let per_state = |(p, q): (f64, f64)| 1.0 + (1.0 - inv + scale * p) / (inv + scale * q);
    model
        .average
        .combine(per_state(components[0]), per_state(components[1]))
}

/// Fits the free-space cyclicity `c0` (and optionally the Purcell factor)
/// to cyclicities measured against cavity detuning or field magnitude.
/// Residuals are in log space. Values of `c0` below 1 are allowed in the
/// fit and flagged, so the reported interval is not truncated.
pub fn fit_c0(
    data: &DataSeries,
    params: &IonCavityParams,
    coupling: &CouplingMatrix,
    tensors: &TensorPair,
    orientation: &FieldOrientation,
    opts: &C0FitOptions,
) -> Result<C0Fit> {
    data.validate()?;
    params.validate()?;
    if data.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} points, need at least {MIN_POINTS}",
            data.len()
        )));
    }
    if !(params.kappa_hz > 0.0) {
        return Err(Error::invalid("kappa_hz", "must be positive"));
    }
    let model = CyclicityModel::new(
        *coupling,
        tensors.clone(),
        &IonCavityParams {
            purcell_max: params.purcell_max,
            ..*params
        },
    );
    let mut warnings = Vec::new();
    let components: Vec<[(f64, f64); 2]> = match &data.x {
        SeriesX::DetuningHz(d) => {
            let lever = d.iter().map(|v| v.abs()).fold(0.0, f64::max) / params.kappa_hz;
            if lever < 1.0 {
                warnings.push(format!(
                    "detuning lever arm max|Δ|/κ = {lever:.2} < 1; c0 is poorly constrained"
                ));
            }
            d.iter()
                .map(|&delta| model.detuned_components(orientation, delta))
                .collect()
        }
        SeriesX::FieldGauss(b) => b
            .iter()
            .map(|&mag| {
                Ok(model.detuned_components(
                    &orientation.with_magnitude(mag)?,
                    params.cavity_detuning_hz,
                ))
            })
            .collect::<Result<_>>()?,
        _ => {
            return Err(Error::invalid(
                "series",
                "c0 fit needs detuning_hz or field_gauss abscissae",
            ))
        }
    };

    let log_y: Vec<f64> = data.y.iter().map(|v| v.ln()).collect();
    let weights: Vec<f64> = match &data.sigma {
        Some(s) => s.iter().zip(&data.y).map(|(s, y)| y / s).collect(),
        None => vec![1.0; data.len()],
    };
    let residuals = |p: &[f64], target: &[f64]| -> Vec<f64> {
        let scale = if opts.fit_purcell { p[1] } else { 1.0 };
        if !(p[0] > 0.0 && scale >= 0.0) {
            return vec![f64::NAN; target.len()];
        }
        components
            .iter()
            .zip(target)
            .zip(&weights)
            .map(|((c, y), w)| (cyclicity(c, p[0], scale, &model).ln() - y) * w)
            .collect()
    };
    let mut p0 = vec![2.0];
    let mut names = vec!["c0"];
    if opts.fit_purcell {
        p0.push(1.0);
        names.push("purcell_scale");
    }
    let lsq = LeastSquaresOptions {
        scale_covariance: data.sigma.is_none(),
        ..LeastSquaresOptions::default()
    };
    let mut report = least_squares(|p| residuals(p, &log_y), &p0, &names, lsq)?;
    if opts.fit_purcell {
        // Report the Purcell factor itself rather than its scale.
        let s = &mut report.parameters[1];
        s.name = "purcell_max".into();
        s.value *= params.purcell_max;
        s.uncertainty *= params.purcell_max;
    }
    if let Some(boot) = opts.bootstrap {
        let p: Vec<f64> = report.parameters.iter().map(|q| q.value).collect();
        let mut pf = p.clone();
        if opts.fit_purcell {
            pf[1] /= params.purcell_max;
        }
        let fitted = residuals(&pf, &log_y);
        let log_fit: Vec<f64> = log_y
            .iter()
            .zip(&fitted)
            .zip(&weights)
            .map(|((y, r), w)| y + r / w)
            .collect();
        let sd = residual_bootstrap(&fitted, p.len(), boot, |draw| {
            let target: Vec<f64> = log_fit
                .iter()
                .zip(draw)
                .zip(&weights)
                .map(|((f, r), w)| f - r / w)
                .collect();
            let quick = LeastSquaresOptions {
                simplex_iterations: 0,
                ..lsq
            };
            let fit = least_squares(|q| residuals(q, &target), &pf, &names, quick)?;
            let mut v: Vec<f64> = fit.parameters.iter().map(|q| q.value).collect();
            if opts.fit_purcell {
                v[1] *= params.purcell_max;
            }
            Ok(v)
        });
        for (param, s) in report.parameters.iter_mut().zip(sd) {
            param.uncertainty = s;
        }
    }
    for w in warnings {
        report.warn(w);
    }
    let c0 = report.value("c0");
    if c0 < 1.0 {
        report.warn(format!("fitted c0 = {c0:.3} is below the physical bound 1"));
    }
    Ok(C0Fit {
        schema_version: crate::SCHEMA_VERSION,
        c0,
        c0_sigma: report.uncertainty("c0"),
        report,
    })
}
