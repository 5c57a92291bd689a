use serde::{Deserialize, Serialize};

use crate::{channel, Error, Result};

/// Selectable spreading factors, transmit powers and bandwidths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioSets {
    pub sf_set: Vec<u8>,
    pub tp_set_dbm: Vec<f64>,
    pub bw_set_khz: Vec<u32>,
}

impl Default for RadioSets {
    fn default() -> Self {
        Self {
            sf_set: vec![7, 8, 9, 10, 11, 12],
            tp_set_dbm: vec![2.0, 5.0, 8.0, 11.0, 14.0],
            bw_set_khz: vec![125, 250, 500],
        }
    }
}

impl RadioSets {
    /// Head sizes `(N, J, M)`.
    pub fn sizes(&self) -> [usize; 3] {
        [self.sf_set.len(), self.tp_set_dbm.len(), self.bw_set_khz.len()]
    }

    pub fn combos(&self) -> usize {
        self.sizes().iter().product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes().contains(&0) {
            return Err(Error::Config("radio sets must be non-empty".into()));
        }
        if let Some(sf) = self.sf_set.iter().find(|sf| !channel::SF_RANGE.contains(sf)) {
            return Err(Error::Config(format!("spreading factor {sf} outside 7..=12")));
        }
        if let Some(bw) = self
            .bw_set_khz
            .iter()
            .find(|bw| !channel::BW_COLUMNS_KHZ.contains(bw))
        {
            return Err(Error::Config(format!("bandwidth {bw} kHz not in 125/250/500")));
        }
        if self.tp_set_dbm.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config("transmit powers must be finite".into()));
        }
        Ok(())
    }

    pub fn sf(&self, a: RadioAssignment) -> u8 {
        self.sf_set[a.sf]
    }

    pub fn tp_dbm(&self, a: RadioAssignment) -> f64 {
        self.tp_set_dbm[a.tp]
    }

    pub fn bw_khz(&self, a: RadioAssignment) -> u32 {
        self.bw_set_khz[a.bw]
    }

    pub fn contains(&self, a: RadioAssignment) -> bool {
        let [n, j, m] = self.sizes();
        a.sf < n && a.tp < j && a.bw < m
    }

    /// Index triple of the given physical values, if all are in the sets.
    pub fn index_of(&self, sf: u8, tp_dbm: f64, bw_khz: u32) -> Option<RadioAssignment> {
        Some(RadioAssignment {
            sf: self.sf_set.iter().position(|&s| s == sf)?,
            tp: self.tp_set_dbm.iter().position(|&p| p == tp_dbm)?,
            bw: self.bw_set_khz.iter().position(|&b| b == bw_khz)?,
        })
    }

    /// Decodes a flat combo index in `[0, combos)`, SF slowest, BW fastest.
    pub fn decode(&self, index: usize) -> RadioAssignment {
        let [_, j, m] = self.sizes();
        RadioAssignment {
            sf: index / (j * m),
            tp: (index / m) % j,
            bw: index % m,
        }
    }
}

/// One ED's (SF, TP, BW) as indices into [`RadioSets`]. Holding a single
/// index per dimension makes each ED use exactly one option of each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct RadioAssignment {
    pub sf: usize,
    pub tp: usize,
    pub bw: usize,
}

/// Per-slot radio triples emitted by one UAV agent. Slot `i` configures the
/// `i`-th ED (ascending index) the UAV serves; slots past the served count
/// are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentAction {
    pub slots: Vec<RadioAssignment>,
}

impl AgentAction {
    pub fn uniform(slots: usize, a: RadioAssignment) -> Self {
        Self {
            slots: vec![a; slots],
        }
    }
}

/// Whether an agent configures each served ED separately or applies one
/// triple to all of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionMode {
    #[default]
    PerEd,
    Shared,
}
