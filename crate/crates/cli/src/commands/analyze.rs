use cavity_cyclicity::inference::{
    adaptive_ml_readout, bayes_smoother, consecutive_agreement, estimate_cyclicity,
    fixed_window_readout, readout_accuracy, HmmParams, MlMode, TerminatedBy,
};
use cavity_cyclicity::photon_sim::{Channel, PhotonRecord, Spin};
use cavity_cyclicity::SCHEMA_VERSION;
use serde::Serialize;

use crate::error::CliError;
use crate::output::Output;
use crate::scenario::Resolved;
use crate::Chain;

#[derive(Serialize)]
struct G2Row {
    offset: usize,
    g2: f64,
    sigma: f64,
}

#[derive(Serialize)]
struct PosteriorRow {
    pulse_index: usize,
    channel: &'static str,
    counts: u16,
    p_up: f64,
}

#[derive(Serialize)]
struct PosteriorSummary {
    schema_version: u32,
    params: HmmParams,
    log_likelihood: f64,
    degenerate: bool,
    /// Fraction of pulses where the more likely state matches the truth.
    accuracy: Option<f64>,
}

#[derive(Serialize)]
struct MlSummary {
    schema_version: u32,
    params: HmmParams,
    f_target: f64,
    max_pulses: usize,
    mode: MlMode,
    measurements: usize,
    timeouts: usize,
    mean_duration_pulses: f64,
    mean_duration_s: f64,
    mean_confidence: f64,
    consecutive_agreement: f64,
    accuracy: Option<f64>,
}

#[derive(Serialize)]
struct HistogramRow {
    difference: i64,
    windows: usize,
}

pub fn analyze(
    chain: Chain,
    record: &PhotonRecord,
    resolved: &Resolved,
    out: &mut Output,
) -> Result<(), CliError> {
    let analysis = &resolved.scenario.analysis;
    let sim = &record.config;
    match chain {
        Chain::G2 => {
            let est = estimate_cyclicity(record, sim.p_ex, analysis.parity)?;
            let rows: Vec<G2Row> = est
                .curve
                .offsets
                .iter()
                .zip(&est.curve.values)
                .zip(&est.curve.sigma)
                .map(|((&offset, &g2), &sigma)| G2Row { offset, g2, sigma })
                .collect();
            out.table("g2", &rows)?;
            out.json("cyclicity.json", &est)?;
            println!(
                "C = {:.1} ± {:.1} (n0 = {:.1} pulses)",
                est.cyclicity, est.cyclicity_sigma, est.fit.n0
            );
        }
        Chain::Bayes => {
            let params = resolved.hmm_params(sim);
            let post = bayes_smoother(record, &params)?;
            let rows: Vec<PosteriorRow> = post
                .p_up
                .iter()
                .enumerate()
                .map(|(k, &p_up)| PosteriorRow {
                    pulse_index: k,
                    channel: Channel::of_pulse(k).as_str(),
                    counts: record.count(k),
                    p_up,
                })
                .collect();
            let accuracy = record.truth.as_ref().map(|truth| {
                let hits = post
                    .p_up
                    .iter()
                    .zip(truth)
                    .filter(|(&p, &s)| (p > 0.5) == (s == Spin::Up))
                    .count();
                hits as f64 / truth.len() as f64
            });
            out.table("posterior", &rows)?;
            out.json(
                "posterior.json",
                &PosteriorSummary {
                    schema_version: SCHEMA_VERSION,
                    params,
                    log_likelihood: post.log_likelihood,
                    degenerate: post.degenerate,
                    accuracy,
                },
            )?;
            println!("log-likelihood {:.3}", post.log_likelihood);
        }
        Chain::Ml => {
            let params = resolved.hmm_params(sim);
            let ml = &analysis.ml;
            let results =
                adaptive_ml_readout(record, &params, ml.f_target, ml.max_pulses, ml.mode)?;
            let n = results.len().max(1) as f64;
            let mean_duration = results
                .iter()
                .map(|r| r.duration_pulses as f64)
                .sum::<f64>()
                / n;
            let summary = MlSummary {
                schema_version: SCHEMA_VERSION,
                params,
                f_target: ml.f_target,
                max_pulses: ml.max_pulses,
                mode: ml.mode,
                measurements: results.len(),
                timeouts: results
                    .iter()
                    .filter(|r| r.terminated_by == TerminatedBy::Timeout)
                    .count(),
                mean_duration_pulses: mean_duration,
                mean_duration_s: mean_duration * sim.t_rep_s,
                mean_confidence: results.iter().map(|r| r.confidence).sum::<f64>() / n,
                consecutive_agreement: consecutive_agreement(&results),
                accuracy: record.truth.as_ref().map(|t| readout_accuracy(&results, t)),
            };
            out.table("readout", &results)?;
            out.json("readout.json", &summary)?;
            println!(
                "{} measurements, mean {:.1} ms, agreement {:.3}",
                summary.measurements,
                1e3 * summary.mean_duration_s,
                summary.consecutive_agreement
            );
        }
        Chain::Window => {
            let readout = fixed_window_readout(record, analysis.window_pulses, analysis.tie_break)?;
            let hist: Vec<HistogramRow> = readout
                .histogram
                .iter()
                .map(|&(difference, windows)| HistogramRow {
                    difference,
                    windows,
                })
                .collect();
            out.table("window_histogram", &hist)?;
            out.json("window.json", &readout)?;
            match readout.fidelity {
                Some(f) => println!("{} windows, fidelity {f:.4}", readout.states.len()),
                None => println!("{} windows", readout.states.len()),
            }
        }
    }
    Ok(())
}
