//! Loss terms recorded on the autodiff tape.

use crate::env::AgentAction;
use crate::neural::{PolicyForward, Tape, Var};

/// `min(ρ·Â, clip(ρ, 1−ε, 1+ε)·Â)` with `ρ = exp(logp_new − logp_old)`.
pub fn clipped_surrogate(
    t: &mut Tape,
    logp_new: Var,
    logp_old: f64,
    advantage: f64,
    clip: f64,
) -> Var {
    clipped_surrogate_rows(t, logp_new, &[logp_old], &[advantage], clip)
}

/// Row-wise [`clipped_surrogate`] over a column of log-probabilities.
pub fn clipped_surrogate_rows(
    t: &mut Tape,
    logp_new: Var,
    logp_old: &[f64],
    advantages: &[f64],
    clip: f64,
) -> Var {
    let rows = logp_old.len();
    let old = t.constant_rows(logp_old.to_vec(), rows);
    let adv = t.constant_rows(advantages.to_vec(), rows);
    let diff = t.sub(logp_new, old);
    let ratio = t.exp(diff);
    let unclipped = t.mul(ratio, adv);
    let clipped = t.clamp(ratio, 1.0 - clip, 1.0 + clip);
    let clipped = t.mul(clipped, adv);
    t.min(unclipped, clipped)
}

/// Joint log-probability of `action` over the first `active` slots, and the
/// mean (over those slots) of the summed head entropies. Both are constant
/// zero when no slot is active.
pub fn log_prob_and_entropy(
    t: &mut Tape,
    fwd: &PolicyForward,
    action: &AgentAction,
    active: usize,
) -> (Var, Var) {
    log_prob_and_entropy_rows(t, fwd, &[action], &[active])
}

/// Row-wise [`log_prob_and_entropy`]; row `r` of `fwd` belongs to
/// `actions[r]` with `active[r]` live slots. Returns two columns.
pub fn log_prob_and_entropy_rows(
    t: &mut Tape,
    fwd: &PolicyForward,
    actions: &[&AgentAction],
    active: &[usize],
) -> (Var, Var) {
    let rows = actions.len();
    assert_eq!(rows, active.len(), "one active count per row");
    let mut picks = Vec::with_capacity(3 * fwd.log_probs.len());
    let mut ents = Vec::with_capacity(3 * fwd.log_probs.len());
    for (s, slot) in fwd.log_probs.iter().enumerate() {
        let mask: Vec<f64> = active.iter().map(|&a| if s < a { 1.0 } else { 0.0 }).collect();
        if mask.iter().all(|&m| m == 0.0) {
            continue;
        }
        let weight: Vec<f64> = mask.iter().zip(active).map(|(m, &a)| m / a.max(1) as f64).collect();
        let mask = t.constant_rows(mask, rows);
        let weight = t.constant_rows(weight, rows);
        for (h, head) in slot.iter().enumerate() {
            let idx: Vec<usize> = actions
                .iter()
                .zip(active)
                .map(|(a, &n)| if s < n { [a.slots[s].sf, a.slots[s].tp, a.slots[s].bw][h] } else { 0 })
                .collect();
            let p = t.pick_rows(*head, &idx);
            picks.push(t.mul(p, mask));
            let e = t.entropy_of_log_probs(*head);
            ents.push(t.mul(e, weight));
        }
    }
    if picks.is_empty() {
        let z = t.constant_rows(vec![0.0; rows], rows);
        return (z, z);
    }
    (t.add_n(&picks), t.add_n(&ents))
}

/// Same quantity as [`log_prob_and_entropy`]'s first output, off-tape.
pub fn joint_log_prob(log_probs: &[[Vec<f64>; 3]], action: &AgentAction, active: usize) -> f64 {
    log_probs
        .iter()
        .zip(&action.slots)
        .take(active)
        .map(|(slot, a)| slot[0][a.sf] + slot[1][a.tp] + slot[2][a.bw])
        .sum()
}

/// `(v − target)²`.
pub fn squared_error(t: &mut Tape, value: Var, target: f64) -> Var {
    let tgt = t.constant_scalar(target);
    let d = t.sub(value, tgt);
    t.square(d)
}
