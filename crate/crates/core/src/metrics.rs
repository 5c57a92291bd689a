//! Training metrics as comma-separated text.
//!
//! The first line is a version tag, the second the column header. Rows are
//! appended once per update. Floats are written with the shortest
//! representation that round-trips.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const METRICS_VERSION_LINE: &str = "# uavlora.metrics v1";
pub const METRICS_HEADER: [&str; 8] = [
    "update_index",
    "env_steps",
    "mean_reward",
    "mean_step_ee",
    "success_rate",
    "entropy",
    "policy_loss",
    "value_loss",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub update_index: u64,
    pub env_steps: u64,
    pub mean_reward: f64,
    pub mean_step_ee: f64,
    pub success_rate: f64,
    pub entropy: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
}

/// Append-only writer; the header goes out on creation.
pub struct MetricsWriter {
    path: PathBuf,
    inner: csv::Writer<BufWriter<File>>,
}

impl MetricsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut file = BufWriter::new(File::create(path)?);
        writeln!(file, "{METRICS_VERSION_LINE}")?;
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        inner.write_record(METRICS_HEADER).map_err(|e| csv_err(path, e))?;
        inner.flush()?;
        Ok(Self { path: path.to_path_buf(), inner })
    }

    pub fn append(&mut self, row: &MetricsRow) -> Result<()> {
        self.inner.serialize(row).map_err(|e| csv_err(&self.path, e))?;
        self.inner.flush()?;
        Ok(())
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Metrics { path: path.to_path_buf(), message: e.to_string() }
}

pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut w = MetricsWriter::create(path)?;
    for r in rows {
        w.append(r)?;
    }
    Ok(())
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    if first.trim_end() != METRICS_VERSION_LINE {
        return Err(Error::Metrics {
            path: path.to_path_buf(),
            message: format!(
                "expected version line {METRICS_VERSION_LINE:?}, found {:?}",
                first.trim_end()
            ),
        });
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(METRICS_HEADER) {
        return Err(Error::Metrics {
            path: path.to_path_buf(),
            message: format!(
                "{METRICS_VERSION_LINE}: header mismatch, expected {:?}, found {:?}",
                METRICS_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.deserialize::<MetricsRow>() {
        match rec {
            Ok(r) => rows.push(r),
            Err(e) => {
                // csv counts lines from after the version tag
                let line = e.position().map(|p| p.line() + 1).unwrap_or(0);
                return Err(Error::MetricsRow {
                    path: path.to_path_buf(),
                    line,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(rows)
}
