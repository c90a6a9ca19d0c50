use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Spin::Up => "up",
            Spin::Down => "down",
        }
    }
}

/// Driven transition of a pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    A,
    B,
}

impl Channel {
    pub fn of_pulse(k: usize) -> Channel {
        if k.is_multiple_of(2) {
            Channel::A
        } else {
            Channel::B
        }
    }

    /// Spin state for which this transition is bright.
    pub fn bright_for(self) -> Spin {
        match self {
            Channel::A => Spin::Up,
            Channel::B => Spin::Down,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::A => "A",
            Channel::B => "B",
        }
    }
}

/// Simulation parameters; times in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_pulses: usize,
    pub t_rep_s: f64,
    pub p_ex: f64,
    pub cyclicity: f64,
    /// Detection probability per emitted photon.
    pub eta: f64,
    pub t1_dark_s: f64,
    pub dark_counts_per_window: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_pulses == 0 || !self.n_pulses.is_multiple_of(2) {
            return Err(Error::invalid(
                "n_pulses",
                format!("must be positive and even, got {}", self.n_pulses),
            ));
        }
        if !(self.t_rep_s > 0.0 && self.t_rep_s.is_finite()) {
            return Err(Error::invalid("t_rep_s", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.p_ex) {
            return Err(Error::invalid(
                "p_ex",
                format!("must be in [0, 1], got {}", self.p_ex),
            ));
        }
        if !(self.cyclicity >= 1.0) {
            return Err(Error::invalid(
                "cyclicity",
                format!("must be >= 1, got {}", self.cyclicity),
            ));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::invalid(
                "eta",
                format!("must be in [0, 1], got {}", self.eta),
            ));
        }
        if !(self.t1_dark_s > 0.0) {
            return Err(Error::invalid("t1_dark_s", "must be positive"));
        }
        if !(self.dark_counts_per_window >= 0.0 && self.dark_counts_per_window.is_finite()) {
            return Err(Error::invalid(
                "dark_counts_per_window",
                "must be finite and >= 0",
            ));
        }
        Ok(())
    }

    /// Spin flip probability per pulse from pumping plus intrinsic relaxation.
    pub fn flip_probability_per_pulse(&self) -> f64 {
        self.p_ex / (2.0 * self.cyclicity)
            + super::relaxation_flip_probability(self.t_rep_s, self.t1_dark_s)
    }
}

/// Integrated window counts of an alternating A/B pulse train.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonRecord {
    pub config: SimConfig,
    /// Counts after A pulses (pulse indices 0, 2, 4, ...).
    pub counts_a: Vec<u16>,
    /// Counts after B pulses (pulse indices 1, 3, 5, ...).
    pub counts_b: Vec<u16>,
    /// Spin during each pulse; only known for simulated records.
    pub truth: Option<Vec<Spin>>,
}

impl PhotonRecord {
    pub fn n_pulses(&self) -> usize {
        self.counts_a.len() + self.counts_b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_pulses() == 0
    }

    pub fn count(&self, k: usize) -> u16 {
        match Channel::of_pulse(k) {
            Channel::A => self.counts_a[k / 2],
            Channel::B => self.counts_b[k / 2],
        }
    }

    /// Per-pulse counts in time order.
    pub fn counts(&self) -> impl Iterator<Item = u16> + '_ {
        (0..self.n_pulses()).map(|k| self.count(k))
    }

    pub fn total_a(&self) -> u64 {
        self.counts_a.iter().map(|&c| c as u64).sum()
    }

    pub fn total_b(&self) -> u64 {
        self.counts_b.iter().map(|&c| c as u64).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.counts_a.len();
        let b = self.counts_b.len();
        if a != b && a != b + 1 {
            return Err(Error::Format(format!(
                "A/B window counts inconsistent: {a} vs {b}"
            )));
        }
        if let Some(t) = &self.truth {
            if t.len() != a + b {
                return Err(Error::Format(format!(
                    "truth length {} does not match {} pulses",
                    t.len(),
                    a + b
                )));
            }
        }
        Ok(())
    }
}
