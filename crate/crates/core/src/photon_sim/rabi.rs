use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Phenomenological Rabi experiment: projective initialization, a drive
/// pulse of variable length, projective readout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiConfig {
    pub pulse_durations_s: Vec<f64>,
    pub rabi_frequency_hz: f64,
    /// Gaussian dephasing time; very large values disable decay.
    pub t2_star_s: f64,
    pub readout_fidelity: f64,
    pub shots_per_point: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiPoint {
    pub duration_s: f64,
    /// Error-free flip probability.
    pub true_p_up: f64,
    /// Fraction of shots reported as flipped relative to the initial readout.
    pub p_up: f64,
    /// Binomial standard error of `p_up`.
    pub stderr: f64,
}

impl RabiConfig {
    pub fn validate(&self) -> Result<()> {
        if self
            .pulse_durations_s
            .iter()
            .any(|t| !(*t >= 0.0 && t.is_finite()))
        {
            return Err(Error::invalid(
                "pulse_durations_s",
                "durations must be >= 0",
            ));
        }
        if !(0.5..=1.0).contains(&self.readout_fidelity) {
            return Err(Error::invalid(
                "readout_fidelity",
                format!("must be in [0.5, 1], got {}", self.readout_fidelity),
            ));
        }
        if !(self.rabi_frequency_hz >= 0.0 && self.t2_star_s > 0.0) {
            return Err(Error::invalid(
                "rabi",
                "frequency >= 0 and T2* > 0 required",
            ));
        }
        if self.shots_per_point == 0 {
            return Err(Error::invalid("shots_per_point", "must be positive"));
        }
        Ok(())
    }

    /// `½ − ½ cos(2π f t) e^{−(t/T2*)²}`.
    pub fn true_p_up(&self, t: f64) -> f64 {
        let decay = (-(t / self.t2_star_s).powi(2)).exp();
        0.5 - 0.5 * (std::f64::consts::TAU * self.rabi_frequency_hz * t).cos() * decay
    }
}

/// Each shot: the initial readout reports "down" but is wrong with
/// probability `1 − F`; the drive flips the spin with the true probability;
/// the final readout is wrong with probability `1 − F`. The reported
/// outcome is "up" when the final readout differs from the initial one.
pub fn simulate_rabi(cfg: &RabiConfig) -> Result<Vec<RabiPoint>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let err = 1.0 - cfg.readout_fidelity;
    Ok(cfg
        .pulse_durations_s
        .iter()
        .map(|&t| {
            let p = cfg.true_p_up(t);
            let mut ups = 0usize;
            for _ in 0..cfg.shots_per_point {
                let mut up = rng.random::<f64>() < err;
                if rng.random::<f64>() < p {
                    up = !up;
                }
                if rng.random::<f64>() < err {
                    up = !up;
                }
                ups += up as usize;
            }
            let n = cfg.shots_per_point as f64;
            let p_up = ups as f64 / n;
            RabiPoint {
                duration_s: t,
                true_p_up: p,
                p_up,
                stderr: (p_up * (1.0 - p_up) / n).sqrt(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(fidelity: f64, t2: f64) -> RabiConfig {
        RabiConfig {
            // 0, half period, full period of a 10 MHz drive
            pulse_durations_s: vec![0.0, 50e-9, 100e-9],
            rabi_frequency_hz: 10e6,
            t2_star_s: t2,
            readout_fidelity: fidelity,
            shots_per_point: 200_000,
            seed: 3,
        }
    }

    #[test]
    fn perfect_readout_full_contrast() {
        let pts = simulate_rabi(&cfg(1.0, 1e9)).unwrap();
        assert_eq!(pts[0].p_up, 0.0);
        assert_eq!(pts[1].p_up, 1.0);
        assert_eq!(pts[0].true_p_up, 0.0);
    }

    #[test]
    fn readout_error_enters_twice() {
        let pts = simulate_rabi(&cfg(0.95, 1e9)).unwrap();
        let contrast = pts[1].p_up - pts[0].p_up;
        // (2F − 1)² = 0.81; sd of the difference ≈ 1e-3
        assert!((contrast - 0.81).abs() < 6e-3, "{contrast}");
        assert!((pts[0].p_up - 2.0 * 0.95 * 0.05).abs() < 4e-3);
    }

    #[test]
    fn dephasing_damps_contrast() {
        let c = cfg(1.0, 60e-9);
        assert!(c.true_p_up(100e-9) > 0.4);
        assert!(c.true_p_up(1e-6) > 0.49);
    }

    #[test]
    fn validation() {
        assert!(simulate_rabi(&cfg(0.4, 1.0)).is_err());
        let mut c = cfg(0.9, 1.0);
        c.pulse_durations_s.push(-1.0);
        assert!(simulate_rabi(&c).is_err());
    }
}
