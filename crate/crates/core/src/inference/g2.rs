use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::photon_sim::PhotonRecord;

/// `g²(n)` of integrated window counts at integer pulse offsets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct G2Curve {
    pub offsets: Vec<usize>,
    pub values: Vec<f64>,
    /// Shot-noise estimate `g²/√(coincidences)`; zero when unknown.
    pub sigma: Vec<f64>,
}

impl G2Curve {
    pub fn value_at(&self, offset: usize) -> Option<f64> {
        self.offsets
            .iter()
            .position(|&n| n == offset)
            .map(|i| self.values[i])
    }

    fn parity(&self, rem: usize) -> Vec<(usize, f64)> {
        self.offsets
            .iter()
            .zip(&self.values)
            .filter(|(n, _)| *n % 2 == rem)
            .map(|(n, v)| (*n, *v))
            .collect()
    }

    /// Same-transition (A–A, B–B) correlations.
    pub fn even(&self) -> Vec<(usize, f64)> {
        self.parity(0)
    }

    /// Cross-transition (A–B) correlations.
    pub fn odd(&self) -> Vec<(usize, f64)> {
        self.parity(1)
    }
}

/// `g²(n) = ⟨I_k I_{k+n}⟩ / (⟨I_k⟩⟨I_{k+n}⟩)` over all `N − n` window
/// pairs, each mean taken over its own pair range. The estimator carries an
/// `O(1/N)` bias. Coincidences are accumulated over nonzero windows only,
/// so sparse (low-count) records cost `O(nnz · max_offset · density)`.
pub fn g2_discrete(record: &PhotonRecord, max_offset: usize) -> Result<G2Curve> {
    let n = record.n_pulses();
    if n == 0 {
        return Err(Error::EmptyRecord);
    }
    if 2 * max_offset >= n {
        return Err(Error::invalid(
            "max_offset",
            format!("must be < n_pulses/2 = {}", n / 2),
        ));
    }
    let counts: Vec<u16> = record.counts().collect();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0u64);
    for &c in &counts {
        prefix.push(prefix.last().unwrap() + c as u64);
    }
    if prefix[n] == 0 {
        return Err(Error::EmptyRecord);
    }

    let nnz = counts.iter().filter(|&&c| c > 0).count();
    let sparse_cost = nnz as f64 * (1.0 + nnz as f64 / n as f64 * max_offset as f64);
    let fft_cost = 40.0 * n as f64 * (n as f64).log2();
    let coincidences = if sparse_cost > fft_cost {
        coincidences_fft(&counts, max_offset)
    } else {
        coincidences_sparse(&counts, max_offset)
    };

    let mut offsets = Vec::with_capacity(max_offset + 1);
    let mut values = Vec::with_capacity(max_offset + 1);
    let mut sigma = Vec::with_capacity(max_offset + 1);
    for (d, &coinc) in coincidences.iter().enumerate() {
        let pairs = (n - d) as f64;
        let head = prefix[n - d] as f64 / pairs;
        let tail = (prefix[n] - prefix[d]) as f64 / pairs;
        let g = if head > 0.0 && tail > 0.0 {
            coinc / pairs / (head * tail)
        } else {
            0.0
        };
        offsets.push(d);
        values.push(g);
        sigma.push(if coinc > 0.0 { g / coinc.sqrt() } else { 1.0 });
    }
    Ok(G2Curve {
        offsets,
        values,
        sigma,
    })
}

/// `Σ_k I_k I_{k+d}` for `d ≤ max_offset`, visiting nonzero windows only.
fn coincidences_sparse(counts: &[u16], max_offset: usize) -> Vec<f64> {
    let nonzero: Vec<(usize, f64)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(k, &c)| (k, c as f64))
        .collect();
    let mut out = vec![0.0; max_offset + 1];
    for (i, &(k, ck)) in nonzero.iter().enumerate() {
        for &(j, cj) in &nonzero[i..] {
            let d = j - k;
            if d > max_offset {
                break;
            }
            out[d] += ck * cj;
        }
    }
    out
}

/// Same sums through a zero-padded FFT; results are integers, so rounding
/// removes the transform error.
fn coincidences_fft(counts: &[u16], max_offset: usize) -> Vec<f64> {
    use rustfft::{num_complex::Complex, FftPlanner};
    let len = (2 * counts.len()).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = counts
        .iter()
        .map(|&c| Complex::new(c as f64, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for v in &mut buf {
        *v = Complex::new(v.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    buf[..=max_offset]
        .iter()
        .map(|v| (v.re / len as f64).round())
        .collect()
}
