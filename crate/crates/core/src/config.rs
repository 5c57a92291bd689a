//! Scenario configuration.
//!
//! A scenario is a hierarchical TOML document whose defaults are the
//! published simulation setup. Flat `section.key=value` overrides are applied
//! to the parsed document before it is deserialized, so any field can be
//! swept from the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::ChannelParams;
use crate::env::{ActionMode, RadioSets, RewardWeights};
use crate::mappo::TrainConfig;
use crate::mobility::MobilityParams;
use crate::power::HoverParams;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldConfig {
    pub num_eds: usize,
    pub num_uavs: usize,
    pub area_side_m: f64,
    /// Episode length `T` in steps.
    pub horizon: usize,
    /// Per-UAV association quota; `ceil(V/U)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quota: Option<usize>,
    pub comm_range_m: f64,
    #[serde(default)]
    pub action_mode: ActionMode,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            num_eds: 10,
            num_uavs: 2,
            area_side_m: 1000.0,
            horizon: 150,
            quota: None,
            comm_range_m: 800.0,
            action_mode: ActionMode::PerEd,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub world: WorldConfig,
    pub mobility: MobilityParams,
    pub channel: ChannelParams,
    pub radio: RadioSets,
    pub hover: HoverParams,
    pub reward: RewardWeights,
    pub train: TrainConfig,
    pub seeds: Vec<u64>,
    /// Optional threshold-table file replacing the built-in table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_table: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            world: WorldConfig::default(),
            mobility: MobilityParams::default(),
            channel: ChannelParams::default(),
            radio: RadioSets::default(),
            hover: HoverParams::default(),
            reward: RewardWeights::default(),
            train: TrainConfig::default(),
            seeds: vec![0, 42, 2021],
            snr_table: None,
        }
    }
}

impl ScenarioConfig {
    /// Association quota in effect.
    pub fn quota(&self) -> usize {
        self.world
            .quota
            .unwrap_or_else(|| self.world.num_eds.div_ceil(self.world.num_uavs.max(1)).max(1))
    }

    /// Mobility parameters with the world's area filled in.
    pub fn mobility_params(&self) -> MobilityParams {
        MobilityParams {
            area_side: self.world.area_side_m,
            ..self.mobility.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = &self.world;
        if w.num_uavs == 0 || w.horizon == 0 {
            return Err(Error::Config(
                "num_uavs and horizon must be positive".into(),
            ));
        }
        if !(w.area_side_m > 0.0) || !(w.comm_range_m > 0.0) {
            return Err(Error::Config("area_side_m and comm_range_m must be positive".into()));
        }
        if w.quota == Some(0) {
            return Err(Error::Config("quota must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        self.mobility_params().validate()?;
        self.channel.validate()?;
        self.radio.validate()?;
        self.hover.validate()?;
        self.train.validate()?;
        if [
            self.reward.w_ee,
            self.reward.w_success,
            self.reward.w_margin,
            self.reward.w_power,
            self.reward.margin_cap_db,
            self.reward.negative_margin_scale,
        ]
        .iter()
        .any(|x| !x.is_finite())
        {
            return Err(Error::Config("reward weights must be finite".into()));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario config serializes")
    }

    /// Loads `path` (or the defaults when `None`) and applies `overrides`.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::try_from(Self::default())
                .map_err(|e| Error::Config(e.to_string()))?,
        };
        for ov in overrides {
            apply_override(&mut doc, ov)?;
        }
        toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    /// First 8 hex digits of the SHA-256 of the canonical TOML form.
    pub fn short_hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().take(4).map(|b| format!("{b:02x}")).collect()
    }
}

/// Applies one `dotted.key=value` override. The value is parsed as a TOML
/// literal when possible (numbers, booleans, arrays) and as a bare string
/// otherwise.
pub fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not key=value")))?;
    let value = parse_literal(raw.trim());
    let path: Vec<&str> = key.trim().split('.').collect();
    let (last, parents) = path.split_last().expect("split yields one element");
    let mut table = doc;
    for p in parents {
        table = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{p}` is not a section")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

fn parse_literal(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = ScenarioConfig::default();
        c.validate().unwrap();
        let back = ScenarioConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn quota_defaults_to_ceiling() {
        let mut c = ScenarioConfig::default();
        c.world.num_eds = 11;
        c.world.num_uavs = 3;
        assert_eq!(c.quota(), 4);
        c.world.quota = Some(2);
        assert_eq!(c.quota(), 2);
    }

    #[test]
    fn overrides_apply() {
        let c = ScenarioConfig::load(
            None,
            &[
                "world.num_eds=60".into(),
                "train.lr=0.001".into(),
                "radio.bw_set_khz=[125]".into(),
                "world.action_mode=shared".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.world.num_eds, 60);
        assert_eq!(c.train.lr, 1e-3);
        assert_eq!(c.radio.bw_set_khz, vec![125]);
        assert_eq!(c.world.action_mode, ActionMode::Shared);
    }

    #[test]
    fn bad_override_is_reported() {
        assert!(ScenarioConfig::load(None, &["world.num_eds".into()]).is_err());
        assert!(ScenarioConfig::load(None, &["world.bogus=1".into()]).is_err());
        assert!(ScenarioConfig::load(None, &["world.num_eds.x=1".into()]).is_err());
    }

    #[test]
    fn validation_catches_zero_uavs() {
        let mut c = ScenarioConfig::default();
        c.world.num_uavs = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ScenarioConfig::default();
        let mut b = a.clone();
        assert_eq!(a.short_hash(), b.short_hash());
        b.world.num_eds = 11;
        assert_ne!(a.short_hash(), b.short_hash());
        assert_eq!(a.short_hash().len(), 8);
    }
}
