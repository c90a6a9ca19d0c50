//! Analysis chain for photon records: discrete g², pumping-time extraction,
//! Bayesian smoothing and single-shot readout.

mod g2;
mod hmm;
mod metrics;
mod n0;
mod readout;

pub use g2::{g2_discrete, G2Curve};
pub use hmm::{bayes_smoother, forward_filter, HmmParams, SmoothedPosterior};
pub use metrics::{readout_metrics, ReadoutMetrics};
pub use n0::{cyclicity_from_n0, estimate_cyclicity, fit_n0, CyclicityEstimate, N0Fit, ParityMode};
pub use readout::{
    adaptive_ml_readout, consecutive_agreement, fixed_window_readout, readout_accuracy, MlMode,
    ReadoutResult, TerminatedBy, TieBreak, WindowReadout,
};
