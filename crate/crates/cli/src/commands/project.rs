use cavity_cyclicity::inference::{readout_metrics, ReadoutMetrics};
use cavity_cyclicity::presets::DeviceProjection;
use cavity_cyclicity::SCHEMA_VERSION;
use serde::Serialize;

use crate::error::CliError;
use crate::output::Output;
use crate::scenario::Resolved;

#[derive(Serialize)]
struct Projection {
    schema_version: u32,
    device: DeviceProjection,
    eta: f64,
    f_target: f64,
    metrics: ReadoutMetrics,
    duration_s: f64,
    /// False when the target exceeds the cyclicity-limited fidelity.
    target_reachable: bool,
}

pub fn project(
    resolved: &Resolved,
    f_target: Option<f64>,
    out: &mut Output,
) -> Result<(), CliError> {
    let section = &resolved.scenario.project;
    let d = section.device;
    let f_target = f_target.unwrap_or(section.f_target);
    let eta = d.efficiency.total();
    let metrics = readout_metrics(eta, d.cyclicity, d.p_ex, d.snr, f_target)?;
    let p = Projection {
        schema_version: SCHEMA_VERSION,
        device: d,
        eta,
        f_target,
        metrics,
        duration_s: metrics.duration_s(d.t_rep_s),
        target_reachable: f_target <= metrics.f_avg,
    };
    out.json("projection.json", &p)?;
    println!(
        "F = {:.5} in {:.1} µs ({} photons for {f_target}){}",
        metrics.f_avg,
        1e6 * p.duration_s,
        metrics.photons_needed,
        if p.target_reachable {
            ""
        } else {
            "; target not reachable"
        }
    );
    Ok(())
}
