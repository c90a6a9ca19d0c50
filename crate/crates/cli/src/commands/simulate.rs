use cavity_cyclicity::photon_sim::{simulate_record, write_record_csv, write_record_json};

use crate::error::CliError;
use crate::output::{Format, Output};
use crate::scenario::Resolved;

/// Resolved configuration written next to every record.
pub const CONFIG_ECHO: &str = "config.json";

pub fn simulate(resolved: &Resolved, out: &mut Output) -> Result<(), CliError> {
    let record = simulate_record(&resolved.sim)?;
    match out.format() {
        Format::Csv => write_record_csv(&record, out.writer("record.csv")?)?,
        Format::Json => write_record_json(&record, out.writer("record.json")?)?,
    }
    out.json(CONFIG_ECHO, resolved)?;
    println!(
        "simulated {} pulses ({} A / {} B counts) into {}",
        record.n_pulses(),
        record.total_a(),
        record.total_b(),
        out.dir().display()
    );
    Ok(())
}
