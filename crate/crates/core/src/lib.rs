//! Cavity-enhanced optical spin readout of a Kramers-doublet emitter.
//!
//! The crate is split along the measurement chain:
//!
//! * [`spin_model`]: Zeeman eigensystems, orientation-dependent cavity
//!   couplings and the resulting transition cyclicity.
//! * [`photon_sim`]: seeded Monte-Carlo generator of alternating A/B pulsed
//!   fluorescence records.
//! * [`inference`]: g² autocorrelation, pumping-time extraction, Bayesian
//!   smoothing and single-shot readout.
//! * [`fitting`]: nonlinear least squares and the model fits built on it.
//! * [`presets`]: measured ion/cavity parameters and g-tensor presets.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fitting;
pub mod inference;
pub mod photon_sim;
pub mod presets;
pub mod spin_model;

pub use error::{Error, Result};

/// Version tag written into every JSON/CSV artifact.
pub const SCHEMA_VERSION: u32 = 1;
