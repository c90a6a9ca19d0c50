use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use cavity_cyclicity::SCHEMA_VERSION;
use clap::ValueEnum;
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Where a command writes. Primary files depend only on config and seed;
/// wall-clock data goes to `run.meta.json`.
pub struct Output {
    dir: PathBuf,
    format: Format,
    written: Vec<String>,
}

#[derive(Serialize)]
struct JsonTable<'a, T> {
    schema_version: u32,
    rows: &'a [T],
}

#[derive(Serialize)]
struct Meta<'a> {
    schema_version: u32,
    version: &'static str,
    args: Vec<String>,
    started_unix_s: f64,
    elapsed_s: f64,
    files: &'a [String],
}

impl Output {
    pub fn create(dir: PathBuf, format: Format) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Self {
            dir,
            format,
            written: Vec::new(),
        })
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn open(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(BufWriter::new(file))
    }

    /// Writes `rows` as `<stem>.csv` or `<stem>.json` depending on the format.
    pub fn table<T: Serialize>(&mut self, stem: &str, rows: &[T]) -> Result<(), CliError> {
        match self.format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(self.open(&format!("{stem}.csv"))?);
                for row in rows {
                    w.serialize(row).map_err(cavity_cyclicity::Error::from)?;
                }
                w.flush()
                    .map_err(|e| CliError::io(&self.dir.join(stem), e))?;
            }
            Format::Json => self.json(
                &format!("{stem}.json"),
                &JsonTable {
                    schema_version: SCHEMA_VERSION,
                    rows,
                },
            )?,
        }
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut w = self.open(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(cavity_cyclicity::Error::from)?;
        writeln!(w)
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io(&path, e))
    }

    /// Raw writer for formats handled elsewhere (photon records).
    pub fn writer(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        self.open(name)
    }

    pub fn finish(mut self, started: SystemTime, clock: Instant) -> Result<(), CliError> {
        let files = std::mem::take(&mut self.written);
        let meta = Meta {
            schema_version: SCHEMA_VERSION,
            version: env!("CARGO_PKG_VERSION"),
            args: std::env::args().collect(),
            started_unix_s: started
                .duration_since(UNIX_EPOCH)
                .map_or(0.0, |d| d.as_secs_f64()),
            elapsed_s: clock.elapsed().as_secs_f64(),
            files: &files,
        };
        self.json("run.meta.json", &meta)
    }
}
