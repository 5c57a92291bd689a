use serde::{Deserialize, Serialize};

/// Features per observed ED: x, y, horizontal distance, channel gain.
pub const OBS_FEATURES: usize = 4;

/// One agent's local view: a fixed `Λ_max × 4` matrix of its served EDs
/// (ascending ED index), zero-padded below the last served ED.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Raw `(x, y, d, G)` rows, exactly `Λ_max` of them.
    pub rows: Vec<[f64; OBS_FEATURES]>,
    /// Row-major normalized copy fed to the policy network.
    pub normalized: Vec<f64>,
    /// Number of non-padding rows.
    pub active: usize,
}

impl Observation {
    /// `rows` may be shorter than `slots`; padding rows are zero in both
    /// the raw and normalized forms.
    pub fn new(mut rows: Vec<[f64; OBS_FEATURES]>, slots: usize, scale: [f64; OBS_FEATURES]) -> Self {
        let active = rows.len().min(slots);
        rows.truncate(slots);
        rows.resize(slots, [0.0; OBS_FEATURES]);
        let normalized = rows
            .iter()
            .flat_map(|r| (0..OBS_FEATURES).map(move |i| r[i] / scale[i]))
            .collect();
        Self {
            rows,
            normalized,
            active,
        }
    }

    pub fn slots(&self) -> usize {
        self.rows.len()
    }

    /// Per-slot mask: true for rows holding a real ED.
    pub fn mask(&self) -> Vec<bool> {
        (0..self.slots()).map(|i| i < self.active).collect()
    }
}
