use cavity_cyclicity::fitting::{DataSeries, SeriesX};
use cavity_cyclicity::spin_model::{CyclicityModel, FieldOrientation};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::output::{Format, Output};
use crate::scenario::Resolved;
use crate::Axis;

const MAX_POINTS: usize = 1_000_000;

#[derive(Serialize)]
struct SweepSummary {
    schema_version: u32,
    axis: &'static str,
    quantity: &'static str,
    points: usize,
    min: f64,
    max: f64,
    max_over_min: f64,
}

/// `start, start + step, …` up to `stop` inclusive.
pub fn sweep_points(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(CliError::Usage("sweep range must be finite".into()));
    }
    if step <= 0.0 || stop < start {
        return Err(CliError::Usage(format!(
            "empty sweep range: start {start}, stop {stop}, step {step}"
        )));
    }
    let n = ((stop - start) / step * (1.0 + 1e-12)).floor() as usize + 1;
    if n > MAX_POINTS {
        return Err(CliError::Usage(format!(
            "sweep has {n} points, limit {MAX_POINTS}"
        )));
    }
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}

/// Spin-relaxation time under pumping: `1/T_SR = 1/T1 + p_ex/(C·t_rep)`.
fn relaxation_time(t_rep_s: f64, t1_dark_s: f64, p_ex: f64, cyclicity: f64) -> f64 {
    1.0 / (1.0 / t1_dark_s + p_ex / (cyclicity * t_rep_s))
}

/// Points are evaluated in parallel and collected in order. Angle axes use
/// the resonant model; detuning and field axes include the Zeeman shifts
/// at the scenario's field magnitude or cavity detuning.
pub fn sweep(
    axis: Axis,
    xs: &[f64],
    resolved: &Resolved,
    out: &mut Output,
) -> Result<(), CliError> {
    let model = CyclicityModel::new(
        resolved.coupling,
        resolved.tensors.clone(),
        &resolved.params,
    );
    let o = resolved.scenario.orientation;
    let detuning = resolved.params.cavity_detuning_hz;
    let sim = &resolved.sim;
    let eval = |x: f64| -> cavity_cyclicity::Result<f64> {
        match axis {
            Axis::Phi => model.resonant(&FieldOrientation::new(x, o.theta_deg, o.magnitude_gauss)?),
            Axis::Theta => model.resonant(&FieldOrientation::new(o.phi_deg, x, o.magnitude_gauss)?),
            Axis::Detuning => model.detuned(&o, x),
            Axis::Field => model.detuned(&o.with_magnitude(x)?, detuning),
            Axis::TRep => {
                if x <= 0.0 {
                    return Err(cavity_cyclicity::Error::InvalidParameter {
                        name: "t_rep_s",
                        reason: format!("must be positive, got {x}"),
                    });
                }
                Ok(relaxation_time(x, sim.t1_dark_s, sim.p_ex, sim.cyclicity))
            }
        }
    };
    let y = xs
        .par_iter()
        .map(|&x| eval(x))
        .collect::<cavity_cyclicity::Result<Vec<f64>>>()?;

    let x = match axis {
        Axis::Phi => SeriesX::Orientation(xs.iter().map(|&p| (p, o.theta_deg)).collect()),
        Axis::Theta => SeriesX::Orientation(xs.iter().map(|&t| (o.phi_deg, t)).collect()),
        Axis::Detuning => SeriesX::DetuningHz(xs.to_vec()),
        Axis::Field => SeriesX::FieldGauss(xs.to_vec()),
        Axis::TRep => SeriesX::RepetitionTimeS(xs.to_vec()),
    };
    let (name, quantity) = match axis {
        Axis::Phi => ("phi", "cyclicity"),
        Axis::Theta => ("theta", "cyclicity"),
        Axis::Detuning => ("detuning", "cyclicity"),
        Axis::Field => ("field", "cyclicity"),
        Axis::TRep => ("t_rep", "t_sr_s"),
    };
    let min = y.iter().copied().fold(f64::INFINITY, f64::min);
    let max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let series = DataSeries::new(x, y, None)?;
    let stem = format!("sweep_{name}");
    match out.format() {
        Format::Csv => series.write_csv(out.writer(&format!("{stem}.csv"))?)?,
        Format::Json => out.json(&format!("{stem}.json"), &series)?,
    }
    out.json(
        &format!("{stem}.summary.json"),
        &SweepSummary {
            schema_version: cavity_cyclicity::SCHEMA_VERSION,
            axis: name,
            quantity,
            points: xs.len(),
            min,
            max,
            max_over_min: max / min,
        },
    )?;
    println!("{} points, {quantity} in [{min:.4e}, {max:.4e}]", xs.len());
    Ok(())
}
