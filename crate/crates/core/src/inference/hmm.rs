use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::photon_sim::{Channel, PhotonRecord, SimConfig, Spin};

/// Two-state telegraph model with Poisson window counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HmmParams {
    /// Flip probability per pulse, each direction.
    pub flip_prob_per_pulse: f64,
    /// Mean counts in a window whose transition matches the spin.
    pub bright_mean: f64,
    /// Mean counts in a mismatched window.
    pub dark_mean: f64,
    pub prior_up: f64,
}

impl HmmParams {
    /// Parameters matching the generating simulation, with a flat prior.
    pub fn matched(cfg: &SimConfig) -> Self {
        Self {
            flip_prob_per_pulse: cfg.flip_probability_per_pulse(),
            bright_mean: cfg.p_ex * cfg.eta + cfg.dark_counts_per_window,
            dark_mean: cfg.dark_counts_per_window,
            prior_up: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("flip_prob_per_pulse", self.flip_prob_per_pulse),
            ("prior_up", self.prior_up),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(name, format!("must be in [0, 1], got {p}")));
            }
        }
        if !(self.dark_mean >= 0.0 && self.dark_mean.is_finite()) {
            return Err(Error::invalid("dark_mean", "must be finite and >= 0"));
        }
        if !(self.bright_mean >= self.dark_mean && self.bright_mean.is_finite()) {
            return Err(Error::invalid(
                "bright_mean",
                format!(
                    "must be finite and >= dark_mean ({} < {})",
                    self.bright_mean, self.dark_mean
                ),
            ));
        }
        Ok(())
    }

    pub fn is_degenerate(&self) -> bool {
        self.bright_mean == self.dark_mean
    }

    /// Count means in pulse `k` for (↑, ↓).
    pub fn means(&self, k: usize) -> [f64; 2] {
        match Channel::of_pulse(k).bright_for() {
            Spin::Up => [self.bright_mean, self.dark_mean],
            Spin::Down => [self.dark_mean, self.bright_mean],
        }
    }

    /// `[[1−q, q], [q, 1−q]]`.
    pub(crate) fn transition(&self) -> [[f64; 2]; 2] {
        let q = self.flip_prob_per_pulse;
        [[1.0 - q, q], [q, 1.0 - q]]
    }

    pub(crate) fn prior(&self) -> [f64; 2] {
        [self.prior_up, 1.0 - self.prior_up]
    }
}

fn poisson_ln_pmf(k: u16, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let ln_fact: f64 = (2..=k as u32).map(|i| (i as f64).ln()).sum();
    k as f64 * mean.ln() - mean - ln_fact
}

/// Emission likelihoods for (↑, ↓) scaled so the larger is 1, plus the log
/// of the scale.
pub(crate) fn emission(params: &HmmParams, k: usize, count: u16) -> ([f64; 2], f64) {
    let [mu, md] = params.means(k);
    let (lu, ld) = (poisson_ln_pmf(count, mu), poisson_ln_pmf(count, md));
    let top = lu.max(ld);
    ([(lu - top).exp(), (ld - top).exp()], top)
}

pub(crate) fn propagate(t: &[[f64; 2]; 2], p: [f64; 2]) -> [f64; 2] {
    [
        p[0] * t[0][0] + p[1] * t[1][0],
        p[0] * t[0][1] + p[1] * t[1][1],
    ]
}

/// Normalized filtered distributions `P(x_t | y_0..y_t)` and the log
/// likelihood of the whole record.
fn forward(record: &PhotonRecord, params: &HmmParams) -> (Vec<[f64; 2]>, f64) {
    let t = params.transition();
    let mut out = Vec::with_capacity(record.n_pulses());
    let mut log_lik = 0.0;
    let mut pred = params.prior();
    for (k, c) in record.counts().enumerate() {
        let (e, scale) = emission(params, k, c);
        let a = [pred[0] * e[0], pred[1] * e[1]];
        let norm = a[0] + a[1];
        log_lik += norm.ln() + scale;
        let a = [a[0] / norm, a[1] / norm];
        out.push(a);
        pred = propagate(&t, a);
    }
    (out, log_lik)
}

/// Causal `P(↑ | y_0..y_t)` at every pulse.
pub fn forward_filter(record: &PhotonRecord, params: &HmmParams) -> Result<Vec<f64>> {
    params.validate()?;
    Ok(forward(record, params).0.iter().map(|a| a[0]).collect())
}

pub(crate) fn predicted_priors(record: &PhotonRecord, params: &HmmParams) -> Vec<[f64; 2]> {
    let t = params.transition();
    let filtered = forward(record, params).0;
    std::iter::once(params.prior())
        .chain(filtered.iter().map(|&a| propagate(&t, a)))
        .take(record.n_pulses())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedPosterior {
    pub schema_version: u32,
    pub p_up: Vec<f64>,
    pub p_down: Vec<f64>,
    pub log_likelihood: f64,
    /// Bright and dark means coincide, so the counts carry no information
    /// and the posterior is the propagated prior.
    pub degenerate: bool,
}

/// Exact forward–backward marginals `P(x_k | all counts)`.
pub fn bayes_smoother(record: &PhotonRecord, params: &HmmParams) -> Result<SmoothedPosterior> {
    params.validate()?;
    let degenerate = params.is_degenerate();
    if degenerate {
        log::warn!("bright_mean == dark_mean: counts are uninformative");
    }
    let n = record.n_pulses();
    let (alpha, log_likelihood) = forward(record, params);
    let t = params.transition();
    let counts: Vec<u16> = record.counts().collect();

    let mut beta = vec![[1.0, 1.0]; n];
    for k in (0..n.saturating_sub(1)).rev() {
        let (e, _) = emission(params, k + 1, counts[k + 1]);
        let next = [e[0] * beta[k + 1][0], e[1] * beta[k + 1][1]];
        let b = [
            t[0][0] * next[0] + t[0][1] * next[1],
            t[1][0] * next[0] + t[1][1] * next[1],
        ];
        let norm = b[0] + b[1];
        beta[k] = [b[0] / norm, b[1] / norm];
    }

    let (mut p_up, mut p_down) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for (a, b) in alpha.iter().zip(&beta) {
        let u = a[0] * b[0];
        let d = a[1] * b[1];
        p_up.push(u / (u + d));
        p_down.push(d / (u + d));
    }
    Ok(SmoothedPosterior {
        schema_version: crate::SCHEMA_VERSION,
        p_up,
        p_down,
        log_likelihood,
        degenerate,
    })
}
