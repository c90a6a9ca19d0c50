use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Residual-bootstrap settings for fit uncertainties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapOptions {
    pub resamples: usize,
    pub seed: u64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self {
            resamples: 200,
            seed: 0,
        }
    }
}

/// Refits `resamples` data sets built by resampling `residuals` with
/// replacement and returns the standard deviation of each parameter.
/// `refit` receives the resampled residual vector.
pub(crate) fn residual_bootstrap<F>(
    residuals: &[f64],
    n_params: usize,
    opts: BootstrapOptions,
    refit: F,
) -> Vec<f64>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let fits: Vec<Vec<f64>> = (0..opts.resamples)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(i as u64);
            let draw: Vec<f64> = (0..residuals.len())
                .map(|_| *residuals.choose(&mut rng).unwrap())
                .collect();
            refit(&draw).ok()
        })
        .collect();
    if fits.len() < 2 {
        return vec![f64::NAN; n_params];
    }
    let k = fits.len() as f64;
    (0..n_params)
        .map(|j| {
            let mean = fits.iter().map(|f| f[j]).sum::<f64>() / k;
            (fits.iter().map(|f| (f[j] - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_of_resampled_residuals() {
        // Refit of a constant: the mean. Its bootstrap σ approaches s/√n.
        let r: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let opts = BootstrapOptions {
            resamples: 4000,
            seed: 9,
        };
        let sd = residual_bootstrap(&r, 1, opts, |d| {
            Ok(vec![d.iter().sum::<f64>() / d.len() as f64])
        });
        let mean = r.iter().sum::<f64>() / 50.0;
        let s = (r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 50.0).sqrt();
        assert!((sd[0] / (s / 50f64.sqrt()) - 1.0).abs() < 0.05, "{sd:?}");
        assert_eq!(
            sd,
            residual_bootstrap(&r, 1, opts, |d| Ok(vec![
                d.iter().sum::<f64>() / d.len() as f64
            ]))
        );
    }
}
