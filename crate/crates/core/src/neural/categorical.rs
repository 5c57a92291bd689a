//! Helpers over log-probability vectors.

use rand::Rng;

pub fn entropy(log_probs: &[f64]) -> f64 {
    -log_probs.iter().map(|l| l.exp() * l).sum::<f64>()
}

/// First index of the largest log-probability.
pub fn argmax(log_probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, l) in log_probs.iter().enumerate() {
        if *l > log_probs[best] {
            best = i;
        }
    }
    best
}

/// Inverse-CDF sample.
pub fn sample<R: Rng + ?Sized>(log_probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, l) in log_probs.iter().enumerate() {
        acc += l.exp();
        if u < acc {
            return i;
        }
    }
    log_probs.len() - 1
}
