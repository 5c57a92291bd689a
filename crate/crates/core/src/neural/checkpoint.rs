//! Versioned JSON checkpoints. Floats are written in shortest round-trip
//! form and parsed exactly, so a save/load cycle is bit-identical.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "uavlora.checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Envelope<T> {
    format: String,
    version: u32,
    kind: String,
    body: T,
}

pub fn save<T: Serialize>(path: &Path, kind: &str, body: &T) -> Result<()> {
    let env = Envelope {
        format: CHECKPOINT_FORMAT.to_string(),
        version: CHECKPOINT_VERSION,
        kind: kind.to_string(),
        body,
    };
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(file, &env)?;
    Ok(())
}

pub fn load<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<T> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let env: Envelope<serde_json::Value> = serde_json::from_reader(file)?;
    if env.format != CHECKPOINT_FORMAT || env.version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "{}: unsupported format {} v{}",
            path.display(),
            env.format,
            env.version
        )));
    }
    if env.kind != kind {
        return Err(Error::Checkpoint(format!(
            "{}: expected a `{kind}` checkpoint, found `{}`",
            path.display(),
            env.kind
        )));
    }
    Ok(serde_json::from_value(env.body)?)
}
