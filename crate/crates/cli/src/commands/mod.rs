mod analyze;
mod fit;
mod project;
mod simulate;
mod sweep;

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use cavity_cyclicity::fitting::DataSeries;
use cavity_cyclicity::photon_sim::{read_record_csv, read_record_json, PhotonRecord, SimConfig};
use serde::Deserialize;

pub use analyze::analyze;
pub use fit::{fit, FitFlags};
pub use project::project;
pub use simulate::{simulate, CONFIG_ECHO};
pub use sweep::{sweep, sweep_points};

use crate::error::CliError;
use crate::scenario::{Resolved, Scenario};

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

#[derive(Deserialize)]
struct Echo {
    scenario: Scenario,
    sim: SimConfig,
}

/// Loads a record plus the parameters it was generated with. JSON records
/// carry their own simulation config; CSV records use `config.json` next to
/// them when present. Analysis settings come from `--config` when given,
/// otherwise from that echo.
pub fn load_record(
    path: &Path,
    mut resolved: Resolved,
    explicit_config: bool,
) -> Result<(PhotonRecord, Resolved), CliError> {
    let echo_path = path.with_file_name(CONFIG_ECHO);
    let echo: Option<Echo> = if echo_path.is_file() {
        let e = serde_json::from_reader(open(&echo_path)?)
            .map_err(|e| CliError::Usage(format!("invalid {}: {e}", echo_path.display())))?;
        Some(e)
    } else {
        None
    };
    let record = if is_json(path) {
        read_record_json(open(path)?)?
    } else {
        let sim = echo
            .as_ref()
            .map_or(resolved.sim.clone(), |e| e.sim.clone());
        read_record_csv(open(path)?, sim)?
    };
    if let Some(e) = echo.filter(|_| !explicit_config) {
        resolved = e.scenario.resolve(None)?;
    }
    resolved.sim = record.config.clone();
    Ok((record, resolved))
}

pub fn load_series(path: &Path) -> Result<DataSeries, CliError> {
    let data = if is_json(path) {
        serde_json::from_reader(open(path)?)
            .map_err(|e| CliError::Usage(format!("invalid {}: {e}", path.display())))?
    } else {
        DataSeries::read_csv(open(path)?)?
    };
    Ok(data)
}
