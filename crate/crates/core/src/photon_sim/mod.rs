//! Seeded Monte-Carlo generator of pulsed-fluorescence photon records.
//!
//! Pulses alternate between the A transition (even pulse index, bright when
//! the ground spin is up) and the B transition (odd index, bright when
//! down). Each pulse integrates the detected counts of its collection
//! window.

mod io;
mod rabi;
mod record;

pub use io::{read_record_csv, read_record_json, write_record_csv, write_record_json};
pub use rabi::{simulate_rabi, RabiConfig, RabiPoint};
pub use record::{Channel, PhotonRecord, SimConfig, Spin};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::Result;

/// Finite stand-in for an infinite signal-to-background ratio.
pub const SNR_SENTINEL: f64 = 1e12;

/// Probability per pulse of an intrinsic flip in each direction.
pub fn relaxation_flip_probability(t_rep_s: f64, t1_dark_s: f64) -> f64 {
    0.5 * (-(-t_rep_s / t1_dark_s).exp_m1())
}

/// Dark-count mean per window that yields `snr` for the given bright-window
/// signal `p_ex · eta`.
pub fn dark_counts_for_snr(p_ex: f64, eta: f64, snr: f64) -> f64 {
    p_ex * eta / snr
}

/// Bright-window signal over background, `p_ex · eta / dark`.
pub fn effective_snr(cfg: &SimConfig) -> f64 {
    let signal = cfg.p_ex * cfg.eta;
    if cfg.dark_counts_per_window <= 0.0 {
        return if signal > 0.0 { SNR_SENTINEL } else { 0.0 };
    }
    (signal / cfg.dark_counts_per_window).min(SNR_SENTINEL)
}

/// Runs the hidden-spin Markov chain for `cfg.n_pulses` pulses. Per pulse:
/// a driven transition matching the spin is excited with `p_ex`; each
/// excitation emits one photon detected with `eta` and flips the spin with
/// `1/C`; then intrinsic relaxation flips it with
/// `(1 − e^{−t_rep/T1})/2`; dark counts are Poisson in every window.
pub fn simulate_record(cfg: &SimConfig) -> Result<PhotonRecord> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n_pulses;
    let pump_flip = 1.0 / cfg.cyclicity;
    let relax = relaxation_flip_probability(cfg.t_rep_s, cfg.t1_dark_s);
    let dark = if cfg.dark_counts_per_window > 0.0 {
        Some(
            Poisson::new(cfg.dark_counts_per_window)
                .map_err(|e| crate::Error::invalid("dark_counts_per_window", e.to_string()))?,
        )
    } else {
        None
    };

    let mut counts_a = Vec::with_capacity(n / 2);
    let mut counts_b = Vec::with_capacity(n / 2);
    let mut truth = Vec::with_capacity(n);
    let mut spin = if rng.random_bool(0.5) {
        Spin::Up
    } else {
        Spin::Down
    };

    for k in 0..n {
        let channel = Channel::of_pulse(k);
        truth.push(spin);
        let mut counts: u32 = 0;
        if channel.bright_for() == spin && rng.random::<f64>() < cfg.p_ex {
            if rng.random::<f64>() < cfg.eta {
                counts += 1;
            }
            if rng.random::<f64>() < pump_flip {
                spin = spin.flipped();
            }
        }
        if relax > 0.0 && rng.random::<f64>() < relax {
            spin = spin.flipped();
        }
        if let Some(d) = &dark {
            counts += d.sample(&mut rng) as u32;
        }
        let counts = counts.min(u16::MAX as u32) as u16;
        match channel {
            Channel::A => counts_a.push(counts),
            Channel::B => counts_b.push(counts),
        }
    }

    Ok(PhotonRecord {
        config: cfg.clone(),
        counts_a,
        counts_b,
        truth: Some(truth),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SimConfig {
        SimConfig {
            n_pulses: 20_000,
            t_rep_s: 60e-6,
            p_ex: 0.5,
            cyclicity: 100.0,
            eta: 0.5,
            t1_dark_s: 1.0,
            dark_counts_per_window: 0.01,
            seed: 7,
        }
    }

    #[test]
    fn seed_determinism() {
        let a = simulate_record(&cfg()).unwrap();
        let b = simulate_record(&cfg()).unwrap();
        assert_eq!(a, b);
        let mut other = cfg();
        other.seed = 8;
        assert_ne!(a.counts_a, simulate_record(&other).unwrap().counts_a);
    }

    #[test]
    fn frozen_telegraph() {
        let c = SimConfig {
            cyclicity: 1e300,
            t1_dark_s: f64::INFINITY,
            dark_counts_per_window: 0.0,
            ..cfg()
        };
        let r = simulate_record(&c).unwrap();
        let truth = r.truth.as_ref().unwrap();
        assert!(truth.iter().all(|s| *s == truth[0]));
        let (a, b) = (r.total_a(), r.total_b());
        assert!(a == 0 || b == 0);
        assert!(a + b > 0);
    }

    #[test]
    fn ideal_detection_counts_every_excitation() {
        let c = SimConfig {
            p_ex: 0.5,
            eta: 1.0,
            dark_counts_per_window: 0.0,
            n_pulses: 400_000,
            ..cfg()
        };
        let r = simulate_record(&c).unwrap();
        let per_pulse = (r.total_a() + r.total_b()) as f64 / c.n_pulses as f64;
        // 1/4 photon per pulse; binomial sd ~ 7e-4
        assert!((per_pulse - 0.25).abs() < 4e-3, "{per_pulse}");
    }

    #[test]
    fn snr_definition() {
        let c = SimConfig {
            p_ex: 0.5,
            eta: 0.028,
            dark_counts_per_window: 0.001,
            ..cfg()
        };
        assert!((effective_snr(&c) - 14.0).abs() < 1e-9);
        let doubled = SimConfig {
            dark_counts_per_window: 0.002,
            ..c.clone()
        };
        assert!((effective_snr(&doubled) - 7.0).abs() < 1e-9);
        let blind = SimConfig {
            eta: 0.0,
            ..c.clone()
        };
        assert_eq!(effective_snr(&blind), 0.0);
        let clean = SimConfig {
            dark_counts_per_window: 0.0,
            ..c
        };
        assert_eq!(effective_snr(&clean), SNR_SENTINEL);
    }

    #[test]
    fn invalid_configs_rejected() {
        for bad in [
            SimConfig {
                n_pulses: 11,
                ..cfg()
            },
            SimConfig { p_ex: 1.5, ..cfg() },
            SimConfig {
                cyclicity: 0.5,
                ..cfg()
            },
            SimConfig { eta: -0.1, ..cfg() },
            SimConfig {
                t1_dark_s: 0.0,
                ..cfg()
            },
            SimConfig {
                dark_counts_per_window: -1.0,
                ..cfg()
            },
        ] {
            assert!(simulate_record(&bad).is_err(), "{bad:?}");
        }
    }
}
