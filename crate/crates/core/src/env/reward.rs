//! Shared team reward: `w_ee·EE + w_success·Ξ + w_margin·β − |w_power|·P_total`.

use serde::{Deserialize, Serialize};

/// Reward weights and shaping constants.
///
/// `w_power` keeps its published signed value (−0.01); the power term is
/// always applied as a penalty of magnitude `|w_power|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardWeights {
    pub w_ee: f64,
    pub w_success: f64,
    pub w_margin: f64,
    pub w_power: f64,
    /// Upper clip of the positive mean-margin reward, dB.
    pub margin_cap_db: f64,
    /// Multiplier applied to a negative mean margin.
    pub negative_margin_scale: f64,
    /// Count hover power in `P_total`.
    pub include_hover_in_power: bool,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            w_ee: 4e-4,
            w_success: 5.0,
            w_margin: 1.0,
            w_power: -1e-2,
            margin_cap_db: 10.0,
            negative_margin_scale: 10.0,
            include_hover_in_power: false,
        }
    }
}

impl RewardWeights {
    pub fn power_penalty(&self) -> f64 {
        self.w_power.abs()
    }
}

/// The individual weighted terms of one step's reward.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardTerms {
    pub ee: f64,
    pub success: f64,
    pub margin: f64,
    pub power: f64,
}

impl RewardTerms {
    pub fn total(&self) -> f64 {
        self.ee + self.success + self.margin - self.power
    }
}

pub fn compose(
    w: &RewardWeights,
    ee_step: f64,
    success: f64,
    margin_term: f64,
    p_total_w: f64,
) -> RewardTerms {
    RewardTerms {
        ee: w.w_ee * ee_step,
        success: w.w_success * success,
        margin: w.w_margin * margin_term,
        power: w.power_penalty() * p_total_w,
    }
}

/// Fraction of associated EDs whose SNR meets their threshold; 0 with no
/// associated ED.
pub fn success_rate(margins_db: &[f64]) -> f64 {
    if margins_db.is_empty() {
        return 0.0;
    }
    let ok = margins_db.iter().filter(|m| **m >= 0.0).count();
    ok as f64 / margins_db.len() as f64
}

/// `clip(m̄, 0, cap)` for a non-negative mean margin, `scale·m̄` otherwise.
pub fn margin_shaping(margins_db: &[f64], cap_db: f64, negative_scale: f64) -> f64 {
    if margins_db.is_empty() {
        return 0.0;
    }
    let mean = margins_db.iter().sum::<f64>() / margins_db.len() as f64;
    if mean >= 0.0 {
        mean.min(cap_db)
    } else {
        negative_scale * mean
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn success_counting() {
        assert_eq!(success_rate(&[1.0, 2.0]), 1.0);
        assert_eq!(success_rate(&[-1.0, -0.1]), 0.0);
        assert_eq!(success_rate(&[1.0, 0.0, 3.0, -2.0]), 0.75);
        assert_eq!(success_rate(&[]), 0.0);
    }

    #[test]
    fn margin_rule() {
        assert_eq!(margin_shaping(&[5.0], 10.0, 10.0), 5.0);
        assert_eq!(margin_shaping(&[4.0, 6.0], 10.0, 10.0), 5.0);
        assert_eq!(margin_shaping(&[-2.0], 10.0, 10.0), -20.0);
        assert_eq!(margin_shaping(&[0.0], 10.0, 10.0), 0.0);
        assert_eq!(margin_shaping(&[30.0], 10.0, 10.0), 10.0);
        assert_eq!(margin_shaping(&[], 10.0, 10.0), 0.0);
    }

    #[test]
    fn power_is_always_a_penalty() {
        let w = RewardWeights::default();
        let t = compose(&w, 0.0, 0.0, 0.0, 2.0);
        assert_eq!(t.total(), -0.02);
        let flipped = RewardWeights {
            w_power: 1e-2,
            ..w
        };
        assert_eq!(compose(&flipped, 0.0, 0.0, 0.0, 2.0).total(), -0.02);
    }
}
