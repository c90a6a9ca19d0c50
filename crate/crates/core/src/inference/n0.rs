use serde::{Deserialize, Serialize};

use super::g2::{g2_discrete, G2Curve};
use crate::error::{Error, Result};
use crate::fitting::{fit_curve, FitReport, LeastSquaresOptions};
use crate::photon_sim::PhotonRecord;

/// Which part of the g² curve carries the pumping decay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParityMode {
    /// `g²(n) − 1` at even `n ≥ 2`.
    Even,
    /// `1 − g²(n)` at odd `n`.
    Odd,
    /// `g²(n) − (g²(n−1) + g²(n+1))/2` at even `n ≥ 2`; insensitive to a
    /// slow decay shared by both parities.
    #[default]
    Difference,
}

/// Result of fitting `A·e^{−n/n₀}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct N0Fit {
    pub schema_version: u32,
    pub mode: ParityMode,
    pub n0: f64,
    pub n0_sigma: f64,
    pub amplitude: f64,
    pub amplitude_sigma: f64,
    /// Last offset included in the fit.
    pub range_end: usize,
    pub n_points: usize,
    pub report: FitReport,
}

const MIN_POINTS: usize = 5;
const SMOOTHING: usize = 5;
const RANGE_FACTOR: f64 = 1.0;
const RANGE_ITERATIONS: usize = 8;
/// A fitted `n₀` beyond this many curve lengths is not a measured decay.
const UNRESOLVED_FACTOR: f64 = 20.0;

/// Signed decay signal and its σ for the given parity mode.
fn decay_signal(curve: &G2Curve, mode: ParityMode) -> Vec<(usize, f64, f64)> {
    let at = |n: usize| {
        curve
            .offsets
            .iter()
            .position(|&o| o == n)
            .map(|i| (curve.values[i], curve.sigma.get(i).copied().unwrap_or(0.0)))
    };
    let mut out = Vec::new();
    for (&n, (&g, &s)) in curve
        .offsets
        .iter()
        .zip(curve.values.iter().zip(&curve.sigma))
    {
        match mode {
            ParityMode::Even if n >= 2 && n % 2 == 0 => out.push((n, g - 1.0, s)),
            ParityMode::Odd if n % 2 == 1 => out.push((n, 1.0 - g, s)),
            ParityMode::Difference if n >= 2 && n % 2 == 0 => {
                if let (Some((lo, slo)), Some((hi, shi))) = (at(n - 1), at(n + 1)) {
                    let sigma = (s * s + (slo * slo + shi * shi) / 4.0).sqrt();
                    out.push((n, g - 0.5 * (lo + hi), sigma));
                }
            }
            _ => {}
        }
    }
    out
}

/// Number of leading points before the smoothed signal sinks below twice
/// its standard error.
fn significant_prefix(points: &[(usize, f64, f64)]) -> usize {
    let w = SMOOTHING.min(points.len().max(1));
    for start in 0..points.len() {
        let chunk = &points[start..(start + w).min(points.len())];
        let k = chunk.len() as f64;
        let mean = chunk.iter().map(|p| p.1).sum::<f64>() / k;
        let se = (chunk.iter().map(|p| p.2 * p.2).sum::<f64>() / k).sqrt() / k.sqrt();
        if mean <= 2.0 * se {
            return start;
        }
    }
    points.len()
}

fn exponential_fit(points: &[(usize, f64, f64)]) -> Result<FitReport> {
    let x: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();

    // Log-linear regression for the starting point.
    let logs: Vec<(f64, f64)> = x
        .iter()
        .zip(&y)
        .filter(|(_, &v)| v > 0.0)
        .map(|(&n, &v)| (n, v.ln()))
        .collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let span = x[x.len() - 1] - x[0];
    let n0_init = if slope < 0.0 {
        -1.0 / slope
    } else {
        10.0 * span
    };
    let a_init = (my - slope.min(0.0) * mx).exp();

    fit_curve(
        |n, p| p[0] * (-n / p[1]).exp(),
        &x,
        &y,
        None,
        &[a_init, n0_init],
        &["amplitude", "n0"],
        LeastSquaresOptions::default(),
    )
}

/// Fits `A·e^{−n/n₀}` to the decaying part of a g² curve by unweighted least
/// squares. Offsets are used from the first usable one up to where a
/// 5-point moving average of the signal falls below 2σ, and no further
/// than the fitted `n₀`.
pub fn fit_n0(curve: &G2Curve, mode: ParityMode) -> Result<N0Fit> {
    let points = decay_signal(curve, mode);
    let keep = significant_prefix(&points);
    if keep < MIN_POINTS {
        return Err(Error::FitFailure(format!(
            "no decaying signal: only {keep} significant offsets (need {MIN_POINTS})"
        )));
    }
    let mut used = keep;
    let mut report = exponential_fit(&points[..used])?;
    // Points beyond about one decay constant add more correlated noise than
    // signal, so the window is narrowed to n ≤ n₀ until it settles.
    for _ in 0..RANGE_ITERATIONS {
        let limit = RANGE_FACTOR * report.value("n0");
        let within = points[..keep]
            .iter()
            .take_while(|p| p.0 as f64 <= limit)
            .count()
            .max(MIN_POINTS);
        if within == used {
            break;
        }
        used = within;
        report = exponential_fit(&points[..used])?;
    }
    let n0 = report.value("n0");
    let amplitude = report.value("amplitude");
    if !(n0 > 0.0 && n0.is_finite() && amplitude > 0.0) {
        return Err(Error::FitFailure(format!(
            "non-decaying data: fitted n0 = {n0}, amplitude = {amplitude}"
        )));
    }
    let longest = points.last().map_or(0, |p| p.0) as f64;
    if n0 > UNRESOLVED_FACTOR * longest {
        return Err(Error::FitFailure(format!(
            "decay not resolved: fitted n0 = {n0:.3e} against offsets up to {longest}"
        )));
    }
    Ok(N0Fit {
        schema_version: crate::SCHEMA_VERSION,
        mode,
        n0,
        n0_sigma: report.uncertainty("n0"),
        amplitude,
        amplitude_sigma: report.uncertainty("amplitude"),
        range_end: points[used - 1].0,
        n_points: used,
        report,
    })
}

/// `C = p_ex / (1 − e^{−1/n₀})`, the exact inverse of the per-pulse pumping
/// decay; reduces to `p_ex·n₀` for large `n₀`.
pub fn cyclicity_from_n0(n0: f64, p_ex: f64) -> f64 {
    p_ex / -(-1.0 / n0).exp_m1()
}

fn cyclicity_sigma(n0: f64, n0_sigma: f64, p_ex: f64) -> f64 {
    let e = (-1.0 / n0).exp();
    let denom = -(-1.0 / n0).exp_m1();
    p_ex * e / (n0 * n0 * denom * denom) * n0_sigma
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclicityEstimate {
    pub schema_version: u32,
    pub cyclicity: f64,
    pub cyclicity_sigma: f64,
    pub p_ex: f64,
    /// Largest offset in the g² curve the fit was made on.
    pub max_offset: usize,
    pub fit: N0Fit,
    #[serde(skip)]
    pub curve: G2Curve,
}

/// Record → g² → n₀ → C. The g² range grows while the fit fails or its
/// window reaches past half the range, up to half the record length.
pub fn estimate_cyclicity(
    record: &PhotonRecord,
    p_ex: f64,
    mode: ParityMode,
) -> Result<CyclicityEstimate> {
    let n = record.n_pulses();
    if n < 4 {
        return Err(Error::EmptyRecord);
    }
    let cap = n / 2 - 1;
    let mut max_offset = 64.min(cap);
    loop {
        let curve = g2_discrete(record, max_offset)?;
        let fit = fit_n0(&curve, mode);
        let grow = match &fit {
            Ok(f) => 2 * f.range_end >= max_offset,
            Err(_) => true,
        };
        if !grow || max_offset == cap {
            let mut fit = fit?;
            if 2 * fit.range_end >= max_offset {
                fit.report
                    .warn("fit window reaches the end of the g² curve; record may be too short");
            }
            return Ok(finish(fit, curve, p_ex, max_offset, n));
        }
        max_offset = (4 * max_offset).min(cap);
    }
}

fn finish(
    fit: N0Fit,
    curve: G2Curve,
    p_ex: f64,
    max_offset: usize,
    n_pulses: usize,
) -> CyclicityEstimate {
    let cyclicity = cyclicity_from_n0(fit.n0, p_ex);
    // Neighbouring g² points are strongly correlated, so the fit σ is far
    // too optimistic. The record holds only about N/(2n₀) flips, which
    // bounds the relative precision from below.
    let flip_floor = cyclicity * (2.0 * fit.n0 / n_pulses as f64).sqrt();
    CyclicityEstimate {
        schema_version: crate::SCHEMA_VERSION,
        cyclicity,
        cyclicity_sigma: cyclicity_sigma(fit.n0, fit.n0_sigma, p_ex).hypot(flip_floor),
        p_ex,
        max_offset,
        fit,
        curve,
    }
}
