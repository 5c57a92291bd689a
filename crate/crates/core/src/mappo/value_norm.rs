use serde::{Deserialize, Serialize};

/// Running mean/variance of value targets (parallel-merge form). The critic
/// regresses normalized targets; predictions are denormalized before they
/// enter advantage estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueNormalizer {
    pub enabled: bool,
    mean: f64,
    var: f64,
    count: f64,
}

impl ValueNormalizer {
    pub fn new(enabled: bool) -> Self {
        Self {
            enabled,
            mean: 0.0,
            var: 1.0,
            count: 0.0,
        }
    }

    fn std(&self) -> f64 {
        self.var.max(1e-8).sqrt()
    }

    pub fn update(&mut self, batch: &[f64]) {
        if !self.enabled || batch.is_empty() {
            return;
        }
        let n = batch.len() as f64;
        let mean = batch.iter().sum::<f64>() / n;
        let var = batch.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        if self.count == 0.0 {
            self.mean = mean;
            self.var = var;
            self.count = n;
            return;
        }
        let total = self.count + n;
        let delta = mean - self.mean;
        let m2 = self.var * self.count + var * n + delta * delta * self.count * n / total;
        self.mean += delta * n / total;
        self.var = m2 / total;
        self.count = total;
    }

    pub fn normalize(&self, x: f64) -> f64 {
        if self.enabled {
            (x - self.mean) / self.std()
        } else {
            x
        }
    }

    pub fn denormalize(&self, x: f64) -> f64 {
        if self.enabled {
            x * self.std() + self.mean
        } else {
            x
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merged_stats_match_pooled() {
        let data: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin() * 10.0 + 3.0).collect();
        let mut vn = ValueNormalizer::new(true);
        vn.update(&data[..20]);
        vn.update(&data[20..]);
        let mean = data.iter().sum::<f64>() / 50.0;
        let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 50.0;
        assert!((vn.mean - mean).abs() < 1e-12);
        assert!((vn.var - var).abs() < 1e-10);
        let x = 7.5;
        assert!((vn.denormalize(vn.normalize(x)) - x).abs() < 1e-12);
    }

    #[test]
    fn disabled_is_identity() {
        let mut vn = ValueNormalizer::new(false);
        vn.update(&[100.0, 200.0]);
        assert_eq!(vn.normalize(5.0), 5.0);
        assert_eq!(vn.denormalize(5.0), 5.0);
    }
}
