mod common;

use common::PolicyCase;
use proptest::prelude::*;
use uavlora::env::AgentAction;
use uavlora::mappo::loss::log_prob_and_entropy_rows;
use uavlora::neural::{categorical, log_softmax, Tape};

/// Gradient of `−mean(log π(a|o)·Â)`, the plain policy-gradient loss.
fn vanilla_gradient(case: &PolicyCase) -> Vec<f64> {
    let values = case.net.params.values.clone();
    let mut t = Tape::new(&values);
    let fwd = case.net.record_rows(&mut t, &case.obs, &case.hidden, case.rows).unwrap();
    let acts: Vec<&AgentAction> = case.actions.iter().collect();
    let (lp, _) = log_prob_and_entropy_rows(&mut t, &fwd, &acts, &case.active);
    let adv = t.constant_rows(case.advantages.clone(), case.rows);
    let weighted = t.mul(lp, adv);
    let s = t.sum(weighted);
    let loss = t.scale(s, -1.0 / case.rows as f64);
    let mut g = vec![0.0; values.len()];
    t.backward(loss, &mut g);
    g
}

#[test]
fn unbounded_clip_reduces_to_vanilla_policy_gradient() {
    for seed in 0..10 {
        let mut case = PolicyCase::random(seed);
        // first epoch: behaviour and current policy coincide
        case.old_logp = case.log_probs(&case.net.params.values.clone());
        case.clip = 1e12;
        case.entropy_coeff = 0.0;
        let mut clipped = vec![0.0; case.net.params.len()];
        case.loss(&case.net.params.values.clone(), Some(&mut clipped));
        let vanilla = vanilla_gradient(&case);
        for (a, b) in clipped.iter().zip(&vanilla) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "seed {seed}: {a} vs {b}");
        }
    }
}

#[test]
fn clipping_zeroes_the_gradient_outside_the_trust_region() {
    let mut case = PolicyCase::random(4);
    case.entropy_coeff = 0.0;
    let current = case.log_probs(&case.net.params.values.clone());
    // ratio 2 with positive advantage sits on the flat clipped branch
    case.old_logp = current.iter().map(|lp| lp - 2f64.ln()).collect();
    case.advantages = vec![1.0; case.rows];
    let mut g = vec![0.0; case.net.params.len()];
    case.loss(&case.net.params.values.clone(), Some(&mut g));
    assert!(g.iter().all(|x| *x == 0.0));
}

proptest! {
    #[test]
    fn categorical_entropy_is_at_most_log_size(logits in prop::collection::vec(-30.0f64..30.0, 1..12)) {
        let lp = log_softmax(&logits);
        let h = categorical::entropy(&lp);
        let bound = (logits.len() as f64).ln();
        prop_assert!(h >= -1e-12);
        prop_assert!(h <= bound + 1e-12);
        let spread = logits.iter().cloned().fold(f64::MIN, f64::max) - logits.iter().cloned().fold(f64::MAX, f64::min);
        if spread > 1e-3 {
            prop_assert!(h < bound);
        }
    }

    #[test]
    fn uniform_logits_reach_the_entropy_bound(n in 1usize..12, c in -5.0f64..5.0) {
        let lp = log_softmax(&vec![c; n]);
        prop_assert!((categorical::entropy(&lp) - (n as f64).ln()).abs() < 1e-12);
    }
}
