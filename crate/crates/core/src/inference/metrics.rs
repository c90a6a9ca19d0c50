use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed-form single-shot readout figures in the cyclicity-limited regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutMetrics {
    pub schema_version: u32,
    /// Photons needed to reach the target fidelity against background.
    pub photons_needed: u32,
    /// `1 − 1/(ηC)`: fidelity limited by decay to the wrong state.
    pub f_avg: f64,
    /// Mean bright-line pulses per detected photon, `1/(p_ex·η)`.
    pub t_meas_pulses: f64,
}

impl ReadoutMetrics {
    /// Wall time for `t_meas_pulses` bright-line pulses when A and B
    /// pulses alternate.
    pub fn duration_s(&self, t_rep_s: f64) -> f64 {
        2.0 * t_rep_s * self.t_meas_pulses
    }
}

pub fn readout_metrics(
    eta: f64,
    cyclicity: f64,
    p_ex: f64,
    snr: f64,
    f_target: f64,
) -> Result<ReadoutMetrics> {
    for (name, v) in [("eta", eta), ("cyclicity", cyclicity), ("p_ex", p_ex)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(name, format!("must be positive, got {v}")));
        }
    }
    if !(snr > 1.0) {
        return Err(Error::invalid("snr", format!("must exceed 1, got {snr}")));
    }
    if !(f_target > 0.5 && f_target < 1.0) {
        return Err(Error::invalid(
            "f_target",
            format!("must be in (0.5, 1), got {f_target}"),
        ));
    }
    let ec = eta * cyclicity;
    if ec <= 1.0 {
        return Err(Error::CyclicityLimited(ec));
    }
    // The small offset keeps exact ratios such as SNR/(SNR+1) at one photon.
    let m = ((f_target / (1.0 - f_target)).ln() / snr.ln() - 1e-9)
        .ceil()
        .max(1.0);
    Ok(ReadoutMetrics {
        schema_version: crate::SCHEMA_VERSION,
        photons_needed: m as u32,
        f_avg: 1.0 - 1.0 / ec,
        t_meas_pulses: 1.0 / (p_ex * eta),
    })
}
