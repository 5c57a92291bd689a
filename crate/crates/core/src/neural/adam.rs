use serde::{Deserialize, Serialize};

use super::params::ParamVector;

/// Adam with bias-corrected moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    steps: u64,
}

impl Adam {
    pub fn new(len: usize, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            beta1,
            beta2,
            eps,
            m: vec![0.0; len],
            v: vec![0.0; len],
            steps: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// `θ ← θ − lr · m̂ / (sqrt(v̂) + eps)` using `params.grads`.
    pub fn step(&mut self, params: &mut ParamVector, lr: f64) {
        assert_eq!(params.values.len(), self.m.len(), "optimizer/parameter width");
        self.steps += 1;
        let bc1 = 1.0 - self.beta1.powi(self.steps as i32);
        let bc2 = 1.0 - self.beta2.powi(self.steps as i32);
        for (((w, g), m), v) in params
            .values
            .iter_mut()
            .zip(&params.grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *w -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::params::SliceKind;

    fn single(value: f64, grad: f64) -> ParamVector {
        let mut p = ParamVector::new();
        p.push("w", SliceKind::Weight, 1, 1);
        p.values[0] = value;
        p.grads[0] = grad;
        p
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = single(0.7, 0.0);
        let mut adam = Adam::new(1, 0.9, 0.999, 1e-8);
        adam.step(&mut p, 1e-2);
        assert_eq!(p.values[0], 0.7);
    }

    #[test]
    fn first_step_hand_value() {
        // m = 0.1·g, v = 0.001·g², m̂ = g, v̂ = g² ⇒ Δ = −lr·g/(|g| + eps)
        let mut p = single(1.0, 0.5);
        let mut adam = Adam::new(1, 0.9, 0.999, 1e-8);
        adam.step(&mut p, 1e-3);
        let expect = 1.0 - 1e-3 * 0.5 / (0.5 + 1e-8);
        assert!((p.values[0] - expect).abs() < 1e-15, "{}", p.values[0]);
    }

    #[test]
    fn identical_coordinates_stay_identical() {
        let mut p = ParamVector::new();
        p.push("w", SliceKind::Weight, 1, 2);
        p.values = vec![0.3, 0.3];
        let mut adam = Adam::new(2, 0.9, 0.999, 1e-8);
        for k in 0..5 {
            p.grads = vec![0.1 * k as f64 - 0.2; 2];
            adam.step(&mut p, 1e-2);
        }
        assert_eq!(p.values[0], p.values[1]);
    }
}
