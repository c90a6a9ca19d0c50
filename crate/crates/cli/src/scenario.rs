//! Run configuration. All quantities in Hz, Gauss, seconds and degrees.

use std::path::{Path, PathBuf};

use cavity_cyclicity::inference::{HmmParams, MlMode, ParityMode, TieBreak};
use cavity_cyclicity::photon_sim::{dark_counts_for_snr, SimConfig};
use cavity_cyclicity::presets::{self, DeviceProjection, IonPreset};
use cavity_cyclicity::spin_model::{CouplingMatrix, FieldOrientation, IonCavityParams, TensorPair};
use cavity_cyclicity::SCHEMA_VERSION;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Field magnitude of the angular scans, G.
const DEFAULT_FIELD_GAUSS: f64 = 112.0;
const DEFAULT_PULSES: usize = 1_000_000;
/// 51 ms at the default 60 µs repetition period.
const DEFAULT_WINDOW_PULSES: usize = 850;
const DEFAULT_ML_MAX_PULSES: usize = 1000;
const DEFAULT_ML_TARGET: f64 = 0.946;
const DEFAULT_PROJECT_TARGET: f64 = 0.99;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub ion: IonSpec,
    #[serde(default)]
    pub tensors: TensorSpec,
    #[serde(default)]
    pub coupling: CouplingSpec,
    #[serde(default = "default_orientation")]
    pub orientation: FieldOrientation,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub project: ProjectSection,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl Default for Scenario {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty scenario is valid")
    }
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_name() -> String {
    "default".into()
}

fn default_orientation() -> FieldOrientation {
    presets::reference_orientation()
        .with_magnitude(DEFAULT_FIELD_GAUSS)
        .expect("valid preset")
}

/// A preset key or inline parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IonSpec {
    Preset(String),
    Inline(InlineIon),
}

impl Default for IonSpec {
    fn default() -> Self {
        IonSpec::Preset("ion1".into())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineIon {
    pub params: IonCavityParams,
    /// Cyclicity used by the simulator.
    pub cyclicity: f64,
    pub t1_dark_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TensorSpec {
    /// `er_yso_site1` or `rotated_standin`.
    Named(String),
    Custom(TensorPair),
}

impl Default for TensorSpec {
    fn default() -> Self {
        TensorSpec::Named("er_yso_site1".into())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CouplingSpec {
    /// `fitted`.
    Named(String),
    Custom(CouplingMatrix),
}

impl Default for CouplingSpec {
    fn default() -> Self {
        CouplingSpec::Named("fitted".into())
    }
}

/// Overrides of the simulation defaults taken from the ion.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub n_pulses: Option<usize>,
    pub t_rep_s: Option<f64>,
    pub p_ex: Option<f64>,
    pub cyclicity: Option<f64>,
    pub eta: Option<f64>,
    pub t1_dark_s: Option<f64>,
    /// Exclusive with `snr`.
    pub dark_counts_per_window: Option<f64>,
    pub snr: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default)]
    pub parity: ParityMode,
    #[serde(default = "half")]
    pub prior_up: f64,
    #[serde(default)]
    pub ml: MlSection,
    #[serde(default = "default_window")]
    pub window_pulses: usize,
    #[serde(default)]
    pub tie_break: TieBreak,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty section is valid")
    }
}

fn half() -> f64 {
    0.5
}

fn default_window() -> usize {
    DEFAULT_WINDOW_PULSES
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlSection {
    #[serde(default = "default_ml_target")]
    pub f_target: f64,
    #[serde(default = "default_ml_max")]
    pub max_pulses: usize,
    #[serde(default)]
    pub mode: MlMode,
}

impl Default for MlSection {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty section is valid")
    }
}

fn default_ml_target() -> f64 {
    DEFAULT_ML_TARGET
}

fn default_ml_max() -> usize {
    DEFAULT_ML_MAX_PULSES
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectSection {
    #[serde(default = "presets::improved_device")]
    pub device: DeviceProjection,
    #[serde(default = "default_project_target")]
    pub f_target: f64,
}

impl Default for ProjectSection {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty section is valid")
    }
}

fn default_project_target() -> f64 {
    DEFAULT_PROJECT_TARGET
}

/// Scenario with presets looked up and defaults filled in.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub scenario: Scenario,
    pub params: IonCavityParams,
    pub tensors: TensorPair,
    pub coupling: CouplingMatrix,
    pub sim: SimConfig,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let scenario: Scenario = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
        if scenario.schema_version != SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "config schema_version {} is not supported (expected {SCHEMA_VERSION})",
                scenario.schema_version
            )));
        }
        Ok(scenario)
    }

    fn ion(&self) -> Result<(IonCavityParams, f64, f64), CliError> {
        match &self.ion {
            IonSpec::Preset(key) => {
                let IonPreset {
                    params,
                    c_max,
                    t1_dark_s,
                    ..
                } = presets::ion_preset(key).ok_or_else(|| {
                    let known: Vec<String> =
                        presets::ion_presets().into_iter().map(|p| p.key).collect();
                    CliError::Usage(format!(
                        "unknown ion preset '{key}' (known: {})",
                        known.join(", ")
                    ))
                })?;
                Ok((params, c_max, t1_dark_s))
            }
            IonSpec::Inline(ion) => Ok((ion.params, ion.cyclicity, ion.t1_dark_s)),
        }
    }

    pub fn resolve(self, seed: Option<u64>) -> Result<Resolved, CliError> {
        let (params, cyclicity, t1_dark_s) = self.ion()?;
        params.validate()?;
        let tensors = match &self.tensors {
            TensorSpec::Named(n) if n == "er_yso_site1" => presets::er_yso_site1(),
            TensorSpec::Named(n) if n == "rotated_standin" => presets::rotated_standin(),
            TensorSpec::Named(n) => {
                return Err(CliError::Usage(format!(
                    "unknown tensor preset '{n}' (known: er_yso_site1, rotated_standin)"
                )))
            }
            TensorSpec::Custom(t) => t.clone(),
        };
        let coupling = match &self.coupling {
            CouplingSpec::Named(n) if n == "fitted" => presets::fitted_coupling(),
            CouplingSpec::Named(n) => {
                return Err(CliError::Usage(format!(
                    "unknown coupling preset '{n}' (known: fitted)"
                )))
            }
            CouplingSpec::Custom(m) => *m,
        };

        let s = &self.sim;
        let p_ex = s.p_ex.unwrap_or(presets::DEFAULT_P_EX);
        let eta = s.eta.unwrap_or(params.eta);
        let dark = match (s.dark_counts_per_window, s.snr) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage(
                    "sim.dark_counts_per_window and sim.snr are exclusive".into(),
                ))
            }
            (Some(d), None) => d,
            (None, snr) => dark_counts_for_snr(p_ex, eta, snr.unwrap_or(params.snr)),
        };
        let sim = SimConfig {
            n_pulses: s.n_pulses.unwrap_or(DEFAULT_PULSES),
            t_rep_s: s.t_rep_s.unwrap_or(presets::DEFAULT_T_REP_S),
            p_ex,
            cyclicity: s.cyclicity.unwrap_or(cyclicity),
            eta,
            t1_dark_s: s.t1_dark_s.unwrap_or(t1_dark_s),
            dark_counts_per_window: dark,
            seed: seed.or(s.seed).unwrap_or(0),
        };
        sim.validate()?;
        Ok(Resolved {
            scenario: self,
            params,
            tensors,
            coupling,
            sim,
        })
    }
}

impl Resolved {
    pub fn hmm_params(&self, sim: &SimConfig) -> HmmParams {
        HmmParams {
            prior_up: self.scenario.analysis.prior_up,
            ..HmmParams::matched(sim)
        }
    }
}
