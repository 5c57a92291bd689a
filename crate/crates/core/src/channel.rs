//! Air-to-ground LoRa link model: probabilistic LoS path loss, channel gain,
//! SNR, same-SF SINR, Shannon rate and the demodulation-threshold table.
//!
//! Powers are carried in linear milliwatts internally; dB and dBm appear only
//! at the function boundaries that are defined in those units.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Spreading factors covered by the threshold table.
pub const SF_RANGE: std::ops::RangeInclusive<u8> = 7..=12;
/// Bandwidths (kHz) covered by the threshold table, in column order.
pub const BW_COLUMNS_KHZ: [u32; 3] = [125, 250, 500];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    pub carrier_hz: f64,
    pub light_speed: f64,
    /// Environment constant `a` of the LoS-probability sigmoid.
    pub env_a: f64,
    /// Environment constant `b` (per degree) of the LoS-probability sigmoid.
    pub env_b: f64,
    pub excess_los_db: f64,
    pub excess_nlos_db: f64,
    pub noise_dbm: f64,
    pub uav_altitude_m: f64,
    /// Use the horizontal distance (clamped at 1 m) inside the free-space
    /// term instead of the slant range.
    pub paper_literal_fspl: bool,
    /// Restrict same-SF interference to transmitters that also share the
    /// victim's bandwidth.
    pub same_bw_interference_only: bool,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            carrier_hz: 868e6,
            light_speed: 3e8,
            env_a: 4.88,
            env_b: 0.43,
            excess_los_db: 0.1,
            excess_nlos_db: 21.0,
            noise_dbm: -120.0,
            uav_altitude_m: 90.0,
            paper_literal_fspl: false,
            same_bw_interference_only: false,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.carrier_hz > 0.0
            && self.light_speed > 0.0
            && self.uav_altitude_m > 0.0
            && self.env_a > 0.0
            && self.env_b > 0.0
            && self.noise_dbm.is_finite()
            && self.excess_los_db.is_finite()
            && self.excess_nlos_db.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid channel parameters: {self:?}")))
        }
    }
}

/// Per-link quantities for one ED at its serving UAV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkMetrics {
    pub elevation_deg: f64,
    pub p_los: f64,
    pub path_loss_db: f64,
    pub gain_linear: f64,
    pub snr_linear: f64,
    pub sinr_linear: f64,
    pub rate_bps: f64,
    /// `SNR(dB) - threshold(SF, BW)`.
    pub margin_db: f64,
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Horizontal distances below this are clamped to avoid the overhead
/// singularity.
pub const MIN_HORIZONTAL_M: f64 = 1.0;

/// Elevation angle in degrees seen from the ground.
pub fn elevation_angle_deg(horizontal_dist_m: f64, altitude_m: f64) -> f64 {
    let d = horizontal_dist_m.max(MIN_HORIZONTAL_M);
    (altitude_m / d).atan().to_degrees()
}

pub fn p_los(theta_deg: f64, params: &ChannelParams) -> f64 {
    1.0 / (1.0 + params.env_a * (-params.env_b * (theta_deg - params.env_a)).exp())
}

/// Free-space loss `20·log10(4πfd/c)` in dB.
pub fn fspl_db(distance_m: f64, carrier_hz: f64, light_speed: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * carrier_hz * distance_m / light_speed).log10()
}

/// Mean A2G path loss for a ground device at `horizontal_dist_m` from the
/// UAV's nadir.
pub fn path_loss_db(horizontal_dist_m: f64, params: &ChannelParams) -> f64 {
    path_loss_parts(horizontal_dist_m, params).2
}

/// `(elevation, p_los, path loss)` in one pass.
pub fn path_loss_parts(horizontal_dist_m: f64, params: &ChannelParams) -> (f64, f64, f64) {
    let h = params.uav_altitude_m;
    let theta = elevation_angle_deg(horizontal_dist_m, h);
    let pl = p_los(theta, params);
    let d_eff = if params.paper_literal_fspl {
        horizontal_dist_m.max(MIN_HORIZONTAL_M)
    } else {
        horizontal_dist_m.hypot(h)
    };
    let loss = fspl_db(d_eff, params.carrier_hz, params.light_speed)
        + params.excess_los_db * pl
        + params.excess_nlos_db * (1.0 - pl);
    (theta, pl, loss)
}

pub fn gain_linear(path_loss_db: f64) -> f64 {
    10f64.powf(-path_loss_db / 10.0)
}

/// Channel gain between a ground point and a UAV at horizontal distance `d`.
pub fn gain_at(horizontal_dist_m: f64, params: &ChannelParams) -> f64 {
    gain_linear(path_loss_db(horizontal_dist_m, params))
}

pub fn snr_linear(tp_dbm: f64, gain_linear: f64, noise_dbm: f64) -> f64 {
    dbm_to_mw(tp_dbm) * gain_linear / dbm_to_mw(noise_dbm)
}

/// `snr / (Σ interferers + 1)`; interferers are the SNRs of the other
/// transmitters sharing the victim's SF, each at its own serving UAV.
pub fn sinr_linear(target_snr: f64, interferer_snrs: &[f64]) -> f64 {
    target_snr / (interferer_snrs.iter().sum::<f64>() + 1.0)
}

pub fn rate_bps(bw_hz: f64, sinr_linear: f64) -> f64 {
    bw_hz * (1.0 + sinr_linear).log2()
}

/// Minimum demodulation SNR in dB, rows SF7..SF12, columns 125/250/500 kHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrThresholdTable {
    pub thresholds: [[f64; 3]; 6],
}

impl Default for SnrThresholdTable {
    fn default() -> Self {
        Self {
            thresholds: [
                [-7.5, -9.0, -11.0],
                [-10.0, -12.0, -13.8],
                [-12.5, -14.5, -16.5],
                [-15.0, -17.0, -19.0],
                [-18.0, -20.0, -21.8],
                [-21.0, -23.0, -25.0],
            ],
        }
    }
}

impl SnrThresholdTable {
    pub fn threshold_db(&self, sf: u8, bw_khz: u32) -> Result<f64> {
        let row = SF_RANGE
            .contains(&sf)
            .then(|| usize::from(sf - 7));
        let col = BW_COLUMNS_KHZ.iter().position(|&b| b == bw_khz);
        match (row, col) {
            (Some(r), Some(c)) => Ok(self.thresholds[r][c]),
            _ => Err(Error::ThresholdLookup { sf, bw_khz }),
        }
    }

    /// Parses six rows (SF7..SF12) of three thresholds (125, 250, 500 kHz)
    /// separated by whitespace or commas. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>().map_err(|e| {
                        Error::Parse(format!("threshold table line {}: {e}", lineno + 1))
                    })
                })
                .collect::<Result<_>>()?;
            let row: [f64; 3] = vals.try_into().map_err(|v: Vec<f64>| {
                Error::Parse(format!(
                    "threshold table line {}: expected 3 values, got {}",
                    lineno + 1,
                    v.len()
                ))
            })?;
            rows.push(row);
        }
        let thresholds: [[f64; 3]; 6] = rows.try_into().map_err(|r: Vec<[f64; 3]>| {
            Error::Parse(format!("threshold table: expected 6 rows, got {}", r.len()))
        })?;
        Ok(Self { thresholds })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# SNR thresholds (dB): rows SF7..SF12, columns 125 250 500 kHz\n");
        for row in &self.thresholds {
            s.push_str(&format!("{} {} {}\n", row[0], row[1], row[2]));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elevation_examples() {
        assert!((elevation_angle_deg(90.0, 90.0) - 45.0).abs() < 1e-12);
        assert!((elevation_angle_deg(0.0, 90.0) - 90f64.atan().to_degrees()).abs() < 1e-12);
        assert!((elevation_angle_deg(0.0, 90.0) - 89.3634).abs() < 1e-4);
        assert!((elevation_angle_deg(1000.0, 90.0) - 5.1428).abs() < 1e-4);
    }

    #[test]
    fn los_probability_examples() {
        let p = ChannelParams::default();
        assert!((p_los(4.88, &p) - 1.0 / 5.88).abs() < 1e-12);
        let at_zero = 1.0 / (1.0 + 4.88 * (0.43f64 * 4.88).exp());
        assert!((p_los(0.0, &p) - at_zero).abs() < 1e-15);
        assert!((p_los(0.0, &p) - 0.02452).abs() < 1e-4);
        assert!((p_los(90.0, &p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fspl_at_one_km() {
        let f = fspl_db(1000.0, 868e6, 3e8);
        assert!((f - 91.21).abs() < 0.01, "{f}");
    }

    #[test]
    fn full_los_adds_only_los_excess() {
        // a huge env_b drives P_LoS to exactly one at high elevation
        let p = ChannelParams {
            env_b: 50.0,
            ..Default::default()
        };
        let d = 10.0;
        let (_, pl, loss) = path_loss_parts(d, &p);
        assert_eq!(pl, 1.0);
        let fspl = fspl_db(d.hypot(90.0), 868e6, 3e8);
        assert!((loss - (fspl + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn path_loss_at_one_kilometre() {
        // slant 1004.04 m, elevation 5.1428°, P_LoS 0.18662
        let p = ChannelParams::default();
        assert!((path_loss_db(1000.0, &p) - 108.3469480008417).abs() < 1e-9);
        assert!((gain_at(1000.0, &p) - 10f64.powf(-10.83469480008417)).abs() < 1e-20);
    }

    #[test]
    fn literal_fspl_uses_horizontal_distance() {
        let p = ChannelParams {
            paper_literal_fspl: true,
            ..Default::default()
        };
        let (_, pl, loss) = path_loss_parts(1000.0, &p);
        let expect = fspl_db(1000.0, 868e6, 3e8) + 0.1 * pl + 21.0 * (1.0 - pl);
        assert!((loss - expect).abs() < 1e-12);
        // clamp at one meter
        assert_eq!(path_loss_db(0.0, &p), path_loss_db(1.0, &p));
    }

    #[test]
    fn gain_and_snr_values() {
        assert_eq!(gain_linear(0.0), 1.0);
        assert!((gain_linear(10.0) - 0.1).abs() < 1e-15);
        assert!((gain_linear(91.21) - 7.568e-10).abs() < 1e-12);
        assert!((snr_linear(0.0, 1.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_mw(14.0) - 25.118864315095795).abs() < 1e-12);
        let snr = snr_linear(14.0, 1e-9, -120.0);
        assert!((snr - 25118.864315095795).abs() < 1e-6);
        assert!((linear_to_db(snr) - 44.0).abs() < 1e-9);
    }

    #[test]
    fn sinr_and_rate() {
        assert_eq!(sinr_linear(7.0, &[]), 7.0);
        assert_eq!(sinr_linear(10.0, &[9.0]), 1.0);
        assert_eq!(sinr_linear(4.0, &[1.0, 2.0]), 1.0);
        assert_eq!(rate_bps(125e3, 1.0), 125e3);
        assert_eq!(rate_bps(125e3, 3.0), 250e3);
        assert_eq!(rate_bps(500e3, 0.0), 0.0);
    }

    #[test]
    fn threshold_lookup() {
        let t = SnrThresholdTable::default();
        assert_eq!(t.threshold_db(7, 125).unwrap(), -7.5);
        assert_eq!(t.threshold_db(12, 500).unwrap(), -25.0);
        assert_eq!(t.threshold_db(9, 250).unwrap(), -14.5);
        assert!(matches!(
            t.threshold_db(6, 125),
            Err(Error::ThresholdLookup { sf: 6, bw_khz: 125 })
        ));
        assert!(t.threshold_db(7, 200).is_err());
    }

    #[test]
    fn threshold_table_is_strictly_ordered() {
        let t = SnrThresholdTable::default().thresholds;
        for c in 0..3 {
            for r in 1..6 {
                assert!(t[r][c] < t[r - 1][c]);
            }
        }
        for row in &t {
            assert!(row[1] < row[0] && row[2] < row[1]);
        }
    }

    #[test]
    fn threshold_text_round_trip() {
        let t = SnrThresholdTable::default();
        assert_eq!(SnrThresholdTable::parse(&t.to_text()).unwrap(), t);
        let err = SnrThresholdTable::parse("1 2 3\n4 5\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(SnrThresholdTable::parse("1 2 3\n").is_err());
    }

    #[test]
    fn db_conversions_invert() {
        for x in [-130.0, -7.5, 0.0, 14.0, 33.3] {
            let back = mw_to_dbm(dbm_to_mw(x));
            assert!((back - x).abs() <= 1e-12 * x.abs().max(1.0));
        }
        assert!((dbm_to_watts(14.0) - 0.025118864315095794).abs() < 1e-15);
    }
}
