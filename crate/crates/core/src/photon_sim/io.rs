//! Record serialization. CSV has one row per pulse:
//! `pulse_index,channel,counts,truth` (truth is `up`, `down` or empty).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::record::{Channel, PhotonRecord, SimConfig, Spin};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Row {
    pulse_index: usize,
    channel: String,
    counts: u16,
    truth: String,
}

pub fn write_record_csv<W: Write>(record: &PhotonRecord, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let truth = record.truth.as_deref();
    for k in 0..record.n_pulses() {
        w.serialize(Row {
            pulse_index: k,
            channel: Channel::of_pulse(k).as_str().to_string(),
            counts: record.count(k),
            truth: truth.map_or("", |t| t[k].as_str()).to_string(),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV record. The file carries no configuration, so the caller
/// supplies the one it was generated with.
pub fn read_record_csv<R: Read>(reader: R, config: SimConfig) -> Result<PhotonRecord> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut counts_a = Vec::new();
    let mut counts_b = Vec::new();
    let mut truth = Vec::new();
    let mut any_truth = false;
    let mut missing_truth = false;
    for (k, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row?;
        if row.pulse_index != k {
            return Err(Error::Format(format!(
                "row {k}: expected pulse_index {k}, found {}",
                row.pulse_index
            )));
        }
        let channel = Channel::of_pulse(k);
        if row.channel != channel.as_str() {
            return Err(Error::Format(format!(
                "row {k}: expected channel {}, found {}",
                channel.as_str(),
                row.channel
            )));
        }
        match channel {
            Channel::A => counts_a.push(row.counts),
            Channel::B => counts_b.push(row.counts),
        }
        match row.truth.as_str() {
            "up" => {
                any_truth = true;
                truth.push(Spin::Up)
            }
            "down" => {
                any_truth = true;
                truth.push(Spin::Down)
            }
            "" => missing_truth = true,
            other => {
                return Err(Error::Format(format!("row {k}: unknown truth {other:?}")));
            }
        }
    }
    if any_truth && missing_truth {
        return Err(Error::Format("truth column partially filled".into()));
    }
    let record = PhotonRecord {
        config,
        counts_a,
        counts_b,
        truth: any_truth.then_some(truth),
    };
    record.validate()?;
    Ok(record)
}

#[derive(Serialize, Deserialize)]
struct RecordFile {
    schema_version: u32,
    #[serde(flatten)]
    record: PhotonRecord,
}

pub fn write_record_json<W: Write>(record: &PhotonRecord, writer: W) -> Result<()> {
    serde_json::to_writer(
        writer,
        &RecordFile {
            schema_version: crate::SCHEMA_VERSION,
            record: record.clone(),
        },
    )?;
    Ok(())
}

pub fn read_record_json<R: Read>(reader: R) -> Result<PhotonRecord> {
    let file: RecordFile = serde_json::from_reader(reader)?;
    if file.schema_version != crate::SCHEMA_VERSION {
        return Err(Error::Format(format!(
            "unsupported schema version {}",
            file.schema_version
        )));
    }
    file.record.validate()?;
    Ok(file.record)
}
