//! Multi-rotor hover power and system energy efficiency.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Rotorcraft constants for the hover-power model. The defaults are
/// documented stand-ins for a small quadcopter; downstream code only relies
/// on the result being a positive constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoverParams {
    pub rotor_count: u32,
    /// Weight carried per rotor, newtons.
    pub rotor_weight_n: f64,
    /// kg/m³.
    pub air_density: f64,
    pub solidity: f64,
    /// Rotor disc area, m².
    pub disc_area_m2: f64,
    pub thrust_coeff: f64,
    pub blade_drag_coeff: f64,
    pub induced_power_factor: f64,
}

impl Default for HoverParams {
    fn default() -> Self {
        Self {
            rotor_count: 4,
            rotor_weight_n: 20.0,
            air_density: 1.225,
            solidity: 0.05,
            disc_area_m2: 0.503,
            thrust_coeff: 0.008,
            blade_drag_coeff: 0.012,
            induced_power_factor: 0.1,
        }
    }
}

impl HoverParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.rotor_weight_n,
            self.air_density,
            self.solidity,
            self.disc_area_m2,
            self.thrust_coeff,
            self.blade_drag_coeff,
            self.induced_power_factor,
        ];
        if self.rotor_count >= 1 && positive.iter().all(|&x| x > 0.0 && x.is_finite()) {
            Ok(())
        } else {
            Err(Error::Config(format!("hover parameters must be positive: {self:?}")))
        }
    }
}

/// Hover power in watts. Does not validate; see [`hover_power_w`].
pub fn hover_power_unchecked(p: &HoverParams) -> f64 {
    let profile = p.air_density.powf(-0.5)
        * p.solidity
        * p.disc_area_m2.powf(-0.5)
        * p.thrust_coeff.powf(-1.5)
        * p.blade_drag_coeff
        / 8.0;
    let induced = (1.0 + p.induced_power_factor) / (2.0 * p.air_density * p.disc_area_m2).sqrt();
    f64::from(p.rotor_count) * p.rotor_weight_n.powf(1.5) * (profile + induced)
}

pub fn hover_power_w(p: &HoverParams) -> Result<f64> {
    p.validate()?;
    Ok(hover_power_unchecked(p))
}

/// Per-UAV and system energy-efficiency figures for one timestep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub sum_rate_bps: Vec<f64>,
    pub uplink_power_w: Vec<f64>,
    pub hover_power_w: f64,
    pub per_uav_ee: Vec<f64>,
    pub ee_bits_per_joule: f64,
}

impl EnergyBreakdown {
    pub fn new(per_uav_rates: Vec<f64>, per_uav_uplink_w: Vec<f64>, hover_w: f64) -> Self {
        let per_uav_ee: Vec<f64> = per_uav_rates
            .iter()
            .zip(&per_uav_uplink_w)
            .map(|(r, p)| r / (p + hover_w))
            .collect();
        Self {
            ee_bits_per_joule: per_uav_ee.iter().sum(),
            sum_rate_bps: per_uav_rates,
            uplink_power_w: per_uav_uplink_w,
            hover_power_w: hover_w,
            per_uav_ee,
        }
    }
}

/// Per-step system EE in bits/J: `Σ_u rate_u / (uplink_u + hover)`.
pub fn system_ee(per_uav_rates: &[f64], per_uav_uplink_w: &[f64], hover_w: f64) -> f64 {
    debug_assert_eq!(per_uav_rates.len(), per_uav_uplink_w.len());
    per_uav_rates
        .iter()
        .zip(per_uav_uplink_w)
        .map(|(r, p)| r / (p + hover_w))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_hover_power_golden() {
        let p = hover_power_w(&HoverParams::default()).unwrap();
        assert!((p - 402.284389757297).abs() < 1e-9, "{p}");
    }

    #[test]
    fn hover_power_scales_with_weight() {
        let base = HoverParams::default();
        let heavy = HoverParams {
            rotor_weight_n: 40.0,
            ..base.clone()
        };
        let ratio = hover_power_unchecked(&heavy) / hover_power_unchecked(&base);
        assert!((ratio - 2f64.powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn hover_power_vanishes_without_drag_or_induction() {
        let p = HoverParams {
            blade_drag_coeff: 0.0,
            induced_power_factor: -1.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        assert_eq!(hover_power_unchecked(&p), 0.0);
    }

    #[test]
    fn ee_examples() {
        let one = system_ee(&[125000.0], &[0.025118864315095794], 100.0);
        assert!((one - 1249.6860930459231).abs() < 1e-9);
        assert!((one - 1249.69).abs() < 0.01);
        assert_eq!(system_ee(&[0.0], &[0.0], 100.0), 0.0);
        let two = system_ee(&[125000.0; 2], &[0.025118864315095794; 2], 100.0);
        assert_eq!(two, 2.0 * one);
    }

    #[test]
    fn ee_drops_with_more_uplink_power() {
        let a = system_ee(&[1e6], &[0.01], 400.0);
        let b = system_ee(&[1e6], &[0.02], 400.0);
        assert!(b < a);
    }

    #[test]
    fn breakdown_matches_system_ee() {
        let b = EnergyBreakdown::new(vec![1e5, 3e5], vec![0.1, 0.2], 50.0);
        assert_eq!(b.ee_bits_per_joule, system_ee(&[1e5, 3e5], &[0.1, 0.2], 50.0));
    }
}
