//! `cyclicity`: seeded simulations, analyses, parameter sweeps and model fits
//! for cavity-enhanced optical spin readout.

mod commands;
mod error;
mod output;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::CliError;
use crate::output::{Format, Output};
use crate::scenario::{Resolved, Scenario};

#[derive(Parser)]
#[command(name = "cyclicity", version, about)]
struct Cli {
    /// Scenario JSON (units: Hz, G, s, degrees). Built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides `sim.seed` (and the bootstrap seed of `fit`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; overrides the scenario's `output_dir` (default `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Format of tabular outputs. Summaries are always JSON.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a photon-count record.
    Simulate,
    /// Run an analysis chain on a record. CSV records take their simulation
    /// parameters from a sibling `config.json`, else from `--config`.
    Analyze {
        #[arg(value_enum)]
        chain: Chain,
        record: PathBuf,
    },
    /// Model cyclicity (or spin-relaxation time for `t-rep`) over a range.
    Sweep {
        #[arg(value_enum)]
        axis: Axis,
        #[arg(long, allow_hyphen_values = true)]
        start: f64,
        #[arg(long, allow_hyphen_values = true)]
        stop: f64,
        #[arg(long, allow_hyphen_values = true)]
        step: f64,
    },
    /// Fit a model to a measured data series (CSV or JSON).
    Fit {
        #[arg(value_enum)]
        kind: FitKind,
        data: PathBuf,
        /// Residual-bootstrap uncertainties with this many resamples.
        #[arg(long)]
        bootstrap: Option<usize>,
        /// Angle fit: also fit an overall log-amplitude.
        #[arg(long)]
        fit_amplitude: bool,
        /// C0 fit: also fit the Purcell factor.
        #[arg(long)]
        fit_purcell: bool,
    },
    /// Readout figures of a projected device.
    Project {
        #[arg(long)]
        f_target: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Chain {
    G2,
    Bayes,
    Ml,
    Window,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Phi,
    Theta,
    Detuning,
    Field,
    TRep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitKind {
    Angle,
    C0,
    Relaxation,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let started = (SystemTime::now(), Instant::now());
    let scenario = match &cli.config {
        Some(path) => Scenario::load(path)?,
        None => Scenario::default(),
    };
    let dir = cli
        .out
        .clone()
        .or_else(|| scenario.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let resolved: Resolved = scenario.resolve(cli.seed)?;

    // inputs are checked before the output directory is created
    let output = || Output::create(dir.clone(), cli.format);
    let out = match cli.command {
        Command::Simulate => {
            let mut o = output()?;
            commands::simulate(&resolved, &mut o)?;
            o
        }
        Command::Analyze { chain, record } => {
            let (record, resolved) =
                commands::load_record(&record, resolved, cli.config.is_some())?;
            let mut o = output()?;
            commands::analyze(chain, &record, &resolved, &mut o)?;
            o
        }
        Command::Sweep {
            axis,
            start,
            stop,
            step,
        } => {
            let xs = commands::sweep_points(start, stop, step)?;
            let mut o = output()?;
            commands::sweep(axis, &xs, &resolved, &mut o)?;
            o
        }
        Command::Fit {
            kind,
            data,
            bootstrap,
            fit_amplitude,
            fit_purcell,
        } => {
            let data = commands::load_series(&data)?;
            let flags = commands::FitFlags {
                bootstrap,
                seed: cli.seed.unwrap_or(resolved.sim.seed),
                fit_amplitude,
                fit_purcell,
            };
            let mut o = output()?;
            commands::fit(kind, &data, &resolved, &flags, &mut o)?;
            o
        }
        Command::Project { f_target } => {
            let mut o = output()?;
            commands::project(&resolved, f_target, &mut o)?;
            o
        }
    };
    out.finish(started.0, started.1)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
