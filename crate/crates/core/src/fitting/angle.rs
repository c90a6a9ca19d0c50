use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::bootstrap::{residual_bootstrap, BootstrapOptions};
use super::lsq::{least_squares, FitReport, LeastSquaresOptions};
use super::series::{DataSeries, SeriesX};
use crate::error::{Error, Result};
use crate::spin_model::{
    CouplingMatrix, CyclicityModel, ExcitedStateAverage, FieldOrientation, TensorPair,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleFitOptions {
    /// Adds a free overall factor `e^a` on the model, absorbing calibration
    /// offsets of the measured cyclicities.
    #[serde(default)]
    pub fit_amplitude: bool,
    /// Replace the Jacobian uncertainties by a residual bootstrap.
    #[serde(default)]
    pub bootstrap: Option<BootstrapOptions>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleFit {
    pub schema_version: u32,
    pub coupling: CouplingMatrix,
    pub report: FitReport,
}

const MIN_POINTS: usize = 4;
const MIN_SPAN_DEG: f64 = 30.0;
const GRID: usize = 16;
const STARTS: usize = 3;

fn wrap(phase: f64) -> f64 {
    let w = (phase + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Resonant cyclicity at each orientation for `(|g⊥|, arg g∥, arg g⊥)`.
struct AngleModel<'a> {
    tensors: &'a TensorPair,
    orientations: Vec<FieldOrientation>,
    reference: FieldOrientation,
    purcell_max: f64,
    c0: f64,
}

impl AngleModel<'_> {
    fn coupling(&self, p: &[f64]) -> Result<CouplingMatrix> {
        CouplingMatrix::from_polar(p[1], p[0].abs(), p[2], self.reference)
    }

    fn log_cyclicities(&self, p: &[f64]) -> Option<Vec<f64>> {
        let model = CyclicityModel {
            coupling: self.coupling(p).ok()?,
            tensors: self.tensors.clone(),
            purcell_max: self.purcell_max,
            kappa_hz: 1.0,
            c0: self.c0,
            average: ExcitedStateAverage::default(),
        };
        self.orientations
            .iter()
            .map(|o| model.resonant(o).ok().map(f64::ln))
            .collect()
    }
}

/// Fits the coupling matrix at `reference` to cyclicities measured at
/// several field orientations, with `|g∥| = 1`. Residuals are taken in
/// log space (divided by `σ/y` when the series carries uncertainties).
/// Fitted parameters: `g_perp_abs`, `g_par_phase`, `g_perp_phase` and, with
/// [`AngleFitOptions::fit_amplitude`], `log_amplitude`.
pub fn fit_angle_model(
    data: &DataSeries,
    tensors: &TensorPair,
    purcell_max: f64,
    c0: f64,
    reference: FieldOrientation,
    opts: &AngleFitOptions,
) -> Result<AngleFit> {
    data.validate()?;
    let SeriesX::Orientation(angles) = &data.x else {
        return Err(Error::invalid(
            "series",
            "angle fit needs (phi_deg, theta_deg) abscissae",
        ));
    };
    if data.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} orientations, need at least {MIN_POINTS}",
            data.len()
        )));
    }
    let orientations = angles
        .iter()
        .map(|&(phi, theta)| FieldOrientation::angles(phi, theta))
        .collect::<Result<Vec<_>>>()?;
    let span = orientations
        .iter()
        .flat_map(|a| orientations.iter().map(move |b| a.angle_to(b)))
        .fold(0.0, f64::max);
    if span < MIN_SPAN_DEG {
        return Err(Error::DegenerateDesign(format!(
            "orientations span {span:.1}°, need at least {MIN_SPAN_DEG}°"
        )));
    }
    if !(purcell_max >= 0.0) || !(c0 >= 1.0) {
        return Err(Error::invalid(
            "purcell_max/c0",
            "need purcell_max >= 0 and c0 >= 1",
        ));
    }

    let model = AngleModel {
        tensors,
        orientations,
        reference,
        purcell_max,
        c0,
    };
    let log_y: Vec<f64> = data.y.iter().map(|v| v.ln()).collect();
    let weights: Vec<f64> = match &data.sigma {
        Some(s) => s.iter().zip(&data.y).map(|(s, y)| y / s).collect(),
        None => vec![1.0; data.len()],
    };
    let residuals = |p: &[f64], target: &[f64]| -> Vec<f64> {
        let amp = if opts.fit_amplitude { p[3] } else { 0.0 };
        match model.log_cyclicities(p) {
            Some(lc) => lc
                .iter()
                .zip(target)
                .zip(&weights)
                .map(|((c, y), w)| (c + amp - y) * w)
                .collect(),
            None => vec![f64::NAN; target.len()],
        }
    };

    // Starting points: |g⊥| from the largest cyclicity, phases from a grid.
    let c_max = data.y.iter().cloned().fold(1.0, f64::max);
    let g0 = 1.0 / (c_max - 1.0).max(1.0).sqrt();
    let mut starts: Vec<(f64, Vec<f64>)> = Vec::with_capacity(GRID * GRID);
    for i in 0..GRID {
        for j in 0..GRID {
            let mut p = vec![
                g0,
                -PI + 2.0 * PI * i as f64 / GRID as f64,
                -PI + 2.0 * PI * j as f64 / GRID as f64,
            ];
            let Some(lc) = model.log_cyclicities(&p) else {
                continue;
            };
            if opts.fit_amplitude {
                let a = log_y.iter().zip(&lc).map(|(y, c)| y - c).sum::<f64>() / lc.len() as f64;
                p.push(a);
            }
            let cost: f64 = residuals(&p, &log_y).iter().map(|r| r * r).sum();
            if cost.is_finite() {
                starts.push((cost, p));
            }
        }
    }
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut names = vec!["g_perp_abs", "g_par_phase", "g_perp_phase"];
    if opts.fit_amplitude {
        names.push("log_amplitude");
    }
    let lsq = LeastSquaresOptions {
        scale_covariance: data.sigma.is_none(),
        ..LeastSquaresOptions::default()
    };

    let mut best: Option<FitReport> = None;
    for (_, p0) in starts.iter().take(STARTS) {
        let Ok(report) = least_squares(|p| residuals(p, &log_y), p0, &names, lsq) else {
            continue;
        };
        if best
            .as_ref()
            .is_none_or(|b| report.residual_norm < b.residual_norm)
        {
            best = Some(report);
        }
    }
    let mut report =
        best.ok_or_else(|| Error::FitFailure("no starting point gave a finite fit".into()))?;

    let mut p: Vec<f64> = report.parameters.iter().map(|q| q.value).collect();
    p[0] = p[0].abs();
    p[1] = wrap(p[1]);
    p[2] = wrap(p[2]);
    for (param, v) in report.parameters.iter_mut().zip(&p) {
        param.value = *v;
    }

    if let Some(boot) = opts.bootstrap {
        let fitted = residuals(&p, &log_y);
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
            let fit = least_squares(|q| residuals(q, &target), &p, &names, quick)?;
            let mut v: Vec<f64> = fit.parameters.iter().map(|q| q.value).collect();
            v[0] = v[0].abs();
            v[1] = p[1] + wrap(v[1] - p[1]);
            v[2] = p[2] + wrap(v[2] - p[2]);
            Ok(v)
        });
        for (param, s) in report.parameters.iter_mut().zip(sd) {
            param.uncertainty = s;
        }
    }

    Ok(AngleFit {
        schema_version: crate::SCHEMA_VERSION,
        coupling: model.coupling(&p)?,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn planted_series(noise: &[f64]) -> (DataSeries, TensorPair) {
        let tensors = presets::er_yso_site1();
        let truth = presets::fitted_coupling();
        let model = CyclicityModel {
            coupling: truth,
            tensors: tensors.clone(),
            purcell_max: 703.0,
            kappa_hz: 1.0,
            c0: 2.0,
            average: ExcitedStateAverage::default(),
        };
        let angles: Vec<(f64, f64)> = (0..noise.len()).map(|i| (15.0 * i as f64, 90.0)).collect();
        let y = angles
            .iter()
            .zip(noise)
            .map(|(&(p, t), n)| {
                model
                    .resonant(&FieldOrientation::angles(p, t).unwrap())
                    .unwrap()
                    * n.exp()
            })
            .collect();
        (
            DataSeries::new(SeriesX::Orientation(angles), y, None).unwrap(),
            tensors,
        )
    }

    #[test]
    fn exact_data_is_reproduced() {
        let (data, tensors) = planted_series(&[0.0; 12]);
        let fit = fit_angle_model(
            &data,
            &tensors,
            703.0,
            2.0,
            presets::reference_orientation(),
            &AngleFitOptions::default(),
        )
        .unwrap();
        assert!(
            fit.report.residual_norm < 1e-9,
            "{}",
            fit.report.residual_norm
        );
        assert!((fit.coupling.g_perp.norm() - 0.024).abs() < 1e-6);
    }

    #[test]
    fn design_checks() {
        let tensors = presets::er_yso_site1();
        let same = DataSeries::new(
            SeriesX::Orientation(vec![(10.0, 90.0); 6]),
            vec![5.0; 6],
            None,
        )
        .unwrap();
        let r = presets::reference_orientation();
        let o = AngleFitOptions::default();
        assert!(matches!(
            fit_angle_model(&same, &tensors, 703.0, 2.0, r, &o),
            Err(Error::DegenerateDesign(_))
        ));
        let few = DataSeries::new(
            SeriesX::Orientation(vec![(0.0, 90.0), (90.0, 90.0)]),
            vec![5.0; 2],
            None,
        )
        .unwrap();
        assert!(matches!(
            fit_angle_model(&few, &tensors, 703.0, 2.0, r, &o),
            Err(Error::InsufficientData(_))
        ));
        let wrong = DataSeries::new(SeriesX::FieldGauss(vec![1.0; 5]), vec![5.0; 5], None).unwrap();
        assert!(fit_angle_model(&wrong, &tensors, 703.0, 2.0, r, &o).is_err());
    }

    #[test]
    fn phase_wrapping() {
        assert!((wrap(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap(-PI), PI);
        assert!((wrap(0.3) - 0.3).abs() < 1e-15);
    }
}
