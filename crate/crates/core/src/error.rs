use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no SNR threshold for SF{sf} at {bw_khz} kHz")]
    ThresholdLookup { sf: u8, bw_khz: u32 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid action: {0}")]
    Action(String),

    #[error("exhaustive search space of {size} allocations exceeds the limit of {limit}")]
    SearchSpace { size: u128, limit: u128 },

    #[error("non-finite loss during update: {0}")]
    NonFinite(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("metrics file {path}: {message}")]
    Metrics { path: PathBuf, message: String },

    #[error("metrics file {path}, line {line}: {message}")]
    MetricsRow {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
