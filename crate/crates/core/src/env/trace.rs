//! Line-delimited JSON episode traces.
//!
//! The first line is a [`TraceHeader`]; every following line is one
//! [`TraceRecord`]. Bump [`TRACE_VERSION`] on any field change.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{RadioSets, RewardTerms, StepInfo};
use crate::{Error, Result};

pub const TRACE_SCHEMA: &str = "uavlora.trace";
pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub schema: String,
    pub version: u32,
    pub seed: u64,
    pub num_eds: usize,
    pub num_uavs: usize,
    pub horizon: usize,
    pub policy: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdRecord {
    pub ed: usize,
    pub uav: Option<usize>,
    pub sf: u8,
    pub tp_dbm: f64,
    pub bw_khz: u32,
    pub snr_db: Option<f64>,
    pub sinr_db: Option<f64>,
    pub rate_bps: Option<f64>,
    pub margin_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: usize,
    pub eds: Vec<EdRecord>,
    pub ee_step: f64,
    pub ee_episode: f64,
    pub success_rate: f64,
    pub mean_margin_db: f64,
    pub margin_term: f64,
    pub p_total_w: f64,
    pub reward_terms: RewardTerms,
    pub reward: f64,
}

impl TraceRecord {
    pub fn from_info(info: &StepInfo, sets: &RadioSets) -> Self {
        let db = |x: f64| 10.0 * x.log10();
        let eds = info
            .radio
            .iter()
            .enumerate()
            .map(|(v, r)| {
                let link = info.eval.links[v];
                EdRecord {
                    ed: v,
                    uav: info.assignment[v],
                    sf: sets.sf(*r),
                    tp_dbm: sets.tp_dbm(*r),
                    bw_khz: sets.bw_khz(*r),
                    snr_db: link.map(|l| db(l.snr_linear)),
                    sinr_db: link.map(|l| db(l.sinr_linear)),
                    rate_bps: link.map(|l| l.rate_bps),
                    margin_db: link.map(|l| l.margin_db),
                }
            })
            .collect();
        Self {
            t: info.t,
            eds,
            ee_step: info.eval.energy.ee_bits_per_joule,
            ee_episode: info.episode_ee,
            success_rate: info.eval.success_rate,
            mean_margin_db: info.eval.mean_margin_db,
            margin_term: info.eval.margin_term,
            p_total_w: info.eval.p_total_w,
            reward_terms: info.eval.terms,
            reward: info.eval.reward,
        }
    }
}

pub struct TraceWriter {
    out: BufWriter<File>,
}

impl TraceWriter {
    pub fn create(path: &Path, header: &TraceHeader) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut out, header)?;
        out.write_all(b"\n")?;
        Ok(Self { out })
    }

    pub fn write(&mut self, record: &TraceRecord) -> Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn read_trace(path: &Path) -> Result<(TraceHeader, Vec<TraceRecord>)> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty trace", path.display())))??;
    let header: TraceHeader = serde_json::from_str(&first)?;
    if header.schema != TRACE_SCHEMA || header.version != TRACE_VERSION {
        return Err(Error::Parse(format!(
            "{}: unsupported trace schema {} v{}",
            path.display(),
            header.schema,
            header.version
        )));
    }
    let records = lines
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect::<Result<Vec<_>>>()?;
    Ok((header, records))
}
