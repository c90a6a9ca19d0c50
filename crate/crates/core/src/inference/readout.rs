use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::hmm::{emission, predicted_priors, HmmParams};
use crate::error::{Error, Result};
use crate::photon_sim::{Channel, PhotonRecord, Spin};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TerminatedBy {
    Threshold,
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutResult {
    pub state: Spin,
    /// Posterior probability of `state` at `start_pulse`.
    pub confidence: f64,
    pub duration_pulses: usize,
    pub start_pulse: usize,
    pub terminated_by: TerminatedBy,
}

/// Prior used for the state at the start of each measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MlMode {
    /// `prior_up` from the parameters; only counts from the start pulse on
    /// are used.
    #[default]
    Forward,
    /// Prior predicted by filtering all earlier counts, so the estimate
    /// conditions on the whole record up to the stop pulse.
    Smoothed,
}

/// Sequential single-shot readout. Each measurement estimates the spin at
/// its start pulse from counts at that pulse and later, stopping once the
/// posterior reaches `f_target` or after `max_pulses`. Measurements tile the
/// record; a trailing segment that meets neither condition is dropped.
pub fn adaptive_ml_readout(
    record: &PhotonRecord,
    params: &HmmParams,
    f_target: f64,
    max_pulses: usize,
    mode: MlMode,
) -> Result<Vec<ReadoutResult>> {
    params.validate()?;
    if !(f_target > 0.5 && f_target < 1.0) {
        return Err(Error::invalid(
            "f_target",
            format!("must be in (0.5, 1), got {f_target}"),
        ));
    }
    if max_pulses == 0 {
        return Err(Error::invalid("max_pulses", "must be >= 1"));
    }
    let counts: Vec<u16> = record.counts().collect();
    let n = counts.len();
    let trans = params.transition();
    let priors = match mode {
        MlMode::Forward => vec![params.prior(); n],
        MlMode::Smoothed => predicted_priors(record, params),
    };

    let mut results = Vec::new();
    let mut start = 0;
    while start < n {
        let prior = priors[start];
        // f[i][j] ∝ P(y_start..y_t, x_t = j | x_start = i)
        let (e, _) = emission(params, start, counts[start]);
        let mut f = [[e[0], 0.0], [0.0, e[1]]];
        let mut t = start;
        let outcome = loop {
            let l_up = prior[0] * (f[0][0] + f[0][1]);
            let l_down = prior[1] * (f[1][0] + f[1][1]);
            let p_up = l_up / (l_up + l_down);
            let (state, confidence) = if p_up >= 0.5 {
                (Spin::Up, p_up)
            } else {
                (Spin::Down, 1.0 - p_up)
            };
            let duration = t - start + 1;
            let end = if confidence >= f_target {
                Some(TerminatedBy::Threshold)
            } else if duration >= max_pulses {
                Some(TerminatedBy::Timeout)
            } else {
                None
            };
            if let Some(terminated_by) = end {
                break Some(ReadoutResult {
                    state,
                    confidence,
                    duration_pulses: duration,
                    start_pulse: start,
                    terminated_by,
                });
            }
            t += 1;
            if t >= n {
                break None;
            }
            let (e, _) = emission(params, t, counts[t]);
            let mut next = [[0.0; 2]; 2];
            let mut top: f64 = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    next[i][j] = (f[i][0] * trans[0][j] + f[i][1] * trans[1][j]) * e[j];
                    top = top.max(next[i][j]);
                }
            }
            for row in &mut next {
                for v in row {
                    *v /= top;
                }
            }
            f = next;
        };
        match outcome {
            Some(r) => {
                start += r.duration_pulses;
                results.push(r);
            }
            None => break,
        }
    }
    Ok(results)
}

/// Fraction of adjacent measurement pairs reporting the same state.
pub fn consecutive_agreement(results: &[ReadoutResult]) -> f64 {
    if results.len() < 2 {
        return f64::NAN;
    }
    let same = results
        .windows(2)
        .filter(|w| w[0].state == w[1].state)
        .count();
    same as f64 / (results.len() - 1) as f64
}

/// Fraction of measurements matching the true spin at their start pulse.
pub fn readout_accuracy(results: &[ReadoutResult], truth: &[Spin]) -> f64 {
    if results.is_empty() {
        return f64::NAN;
    }
    let hits = results
        .iter()
        .filter(|r| truth.get(r.start_pulse) == Some(&r.state))
        .count();
    hits as f64 / results.len() as f64
}

/// Resolution of windows with `N_A = N_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum TieBreak {
    /// Repeat the previous window's outcome; the first window falls back to ↑.
    #[default]
    Previous,
    Random {
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReadout {
    pub schema_version: u32,
    pub window: usize,
    /// Windows with `N_A − N_B` above this read as ↑.
    pub threshold: i64,
    /// `(N_A − N_B, number of windows)`, sorted by difference.
    pub histogram: Vec<(i64, usize)>,
    pub states: Vec<Spin>,
    pub ties: usize,
    /// Agreement with the true spin at each window start, when known.
    pub fidelity: Option<f64>,
}

/// Classifies consecutive fixed windows by the sign of `N_A − N_B`.
/// Incomplete trailing pulses are ignored.
pub fn fixed_window_readout(
    record: &PhotonRecord,
    window: usize,
    tie_break: TieBreak,
) -> Result<WindowReadout> {
    if window == 0 {
        return Err(Error::invalid("window", "must be >= 1"));
    }
    let counts: Vec<u16> = record.counts().collect();
    let mut rng = match tie_break {
        TieBreak::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        TieBreak::Previous => None,
    };
    let mut hist = std::collections::BTreeMap::<i64, usize>::new();
    let mut states = Vec::with_capacity(counts.len() / window);
    let mut ties = 0;
    let mut previous = Spin::Up;
    for (w, chunk) in counts.chunks_exact(window).enumerate() {
        let diff: i64 = chunk
            .iter()
            .enumerate()
            .map(|(i, &c)| match Channel::of_pulse(w * window + i) {
                Channel::A => c as i64,
                Channel::B => -(c as i64),
            })
            .sum();
        *hist.entry(diff).or_default() += 1;
        let state = match diff.signum() {
            1 => Spin::Up,
            -1 => Spin::Down,
            _ => {
                ties += 1;
                match rng.as_mut().map(|r| r.random_bool(0.5)) {
                    Some(true) => Spin::Up,
                    Some(false) => Spin::Down,
                    None => previous,
                }
            }
        };
        previous = state;
        states.push(state);
    }
    let fidelity = record
        .truth
        .as_ref()
        .filter(|_| !states.is_empty())
        .map(|truth| {
            let hits = states
                .iter()
                .enumerate()
                .filter(|(w, s)| truth[w * window] == **s)
                .count();
            hits as f64 / states.len() as f64
        });
    Ok(WindowReadout {
        schema_version: crate::SCHEMA_VERSION,
        window,
        threshold: 0,
        histogram: hist.into_iter().collect(),
        states,
        ties,
        fidelity,
    })
}
