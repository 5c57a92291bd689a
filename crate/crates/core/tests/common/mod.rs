//! Checks shared by the acceptance suite and the focused test files.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uavlora::env::{AgentAction, RadioAssignment};
use uavlora::mappo::loss::{clipped_surrogate_rows, log_prob_and_entropy_rows};
use uavlora::neural::{CriticNet, CriticSpec, ParamVector, PolicyNet, PolicySpec, Tape};

/// `|a − n| / max(|a|, |n|, 1e-6)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Worst relative error between the tape gradient of `loss` and central
/// differences with step `h`, over every parameter.
pub fn worst_gradient_error(params: &ParamVector, h: f64, loss: impl Fn(&[f64], Option<&mut [f64]>) -> f64) -> f64 {
    let mut analytic = vec![0.0; params.len()];
    loss(&params.values, Some(&mut analytic));
    let mut probe = params.values.clone();
    let mut worst: f64 = 0.0;
    for i in 0..probe.len() {
        let x = probe[i];
        probe[i] = x + h;
        let up = loss(&probe, None);
        probe[i] = x - h;
        let down = loss(&probe, None);
        probe[i] = x;
        worst = worst.max(relative_error(analytic[i], (up - down) / (2.0 * h)));
    }
    worst
}

pub struct PolicyCase {
    pub net: PolicyNet,
    pub rows: usize,
    pub obs: Vec<f64>,
    pub hidden: Vec<f64>,
    pub actions: Vec<AgentAction>,
    pub active: Vec<usize>,
    pub old_logp: Vec<f64>,
    pub advantages: Vec<f64>,
    pub clip: f64,
    pub entropy_coeff: f64,
}

impl PolicyCase {
    /// Random tiny actor, batch and rollout statistics. Old log-probs sit a
    /// random offset away from the current ones so both the clipped and
    /// unclipped branches are exercised away from their kinks.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let slots = rng.random_range(1..=3);
        let spec = PolicySpec {
            input_dim: 4 * slots,
            hidden: rng.random_range(3..=6),
            slots,
            heads: [rng.random_range(2..=6), rng.random_range(2..=5), rng.random_range(2..=3)],
        };
        let net = PolicyNet::init(spec, &mut rng);
        let rows = rng.random_range(1..=4);
        let obs = (0..rows * spec.input_dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let hidden = (0..rows * spec.hidden).map(|_| rng.random_range(-0.9..0.9)).collect();
        let active: Vec<usize> = (0..rows).map(|_| rng.random_range(1..=slots)).collect();
        let actions: Vec<AgentAction> = (0..rows)
            .map(|_| AgentAction {
                slots: (0..slots)
                    .map(|_| RadioAssignment {
                        sf: rng.random_range(0..spec.heads[0]),
                        tp: rng.random_range(0..spec.heads[1]),
                        bw: rng.random_range(0..spec.heads[2]),
                    })
                    .collect(),
            })
            .collect();
        let advantages = (0..rows).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut case = Self {
            net,
            rows,
            obs,
            hidden,
            actions,
            active,
            old_logp: vec![0.0; rows],
            advantages,
            clip: 0.2,
            entropy_coeff: 0.01,
        };
        let current = case.log_probs(&case.net.params.values.clone());
        case.old_logp = current
            .iter()
            .map(|lp| {
                let offsets = [-0.6, -0.07, 0.05, 0.5];
                lp - offsets[rng.random_range(0..4)]
            })
            .collect();
        case
    }

    pub fn log_probs(&self, values: &[f64]) -> Vec<f64> {
        let mut t = Tape::new(values);
        let fwd = self.net.record_rows(&mut t, &self.obs, &self.hidden, self.rows).unwrap();
        let acts: Vec<&AgentAction> = self.actions.iter().collect();
        let (lp, _) = log_prob_and_entropy_rows(&mut t, &fwd, &acts, &self.active);
        t.value(lp).to_vec()
    }

    /// The actor's minibatch loss `−mean(surrogate + c·entropy)`.
    pub fn loss(&self, values: &[f64], grads: Option<&mut [f64]>) -> f64 {
        let mut t = Tape::new(values);
        let fwd = self.net.record_rows(&mut t, &self.obs, &self.hidden, self.rows).unwrap();
        let acts: Vec<&AgentAction> = self.actions.iter().collect();
        let (lp, ent) = log_prob_and_entropy_rows(&mut t, &fwd, &acts, &self.active);
        let surr = clipped_surrogate_rows(&mut t, lp, &self.old_logp, &self.advantages, self.clip);
        let bonus = t.scale(ent, self.entropy_coeff);
        let obj = t.add(surr, bonus);
        let obj = t.sum(obj);
        let loss = t.scale(obj, -1.0 / self.rows as f64);
        if let Some(g) = grads {
            t.backward(loss, g);
        }
        t.scalar(loss)
    }
}

pub struct CriticCase {
    pub net: CriticNet,
    pub rows: usize,
    pub states: Vec<f64>,
    pub hidden: Vec<f64>,
    pub targets: Vec<f64>,
}

impl CriticCase {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC417_1C00);
        let spec = CriticSpec { input_dim: rng.random_range(3..=10), hidden: rng.random_range(3..=6) };
        let net = CriticNet::init(spec, &mut rng);
        let rows = rng.random_range(1..=4);
        Self {
            rows,
            states: (0..rows * spec.input_dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
            hidden: (0..rows * spec.hidden).map(|_| rng.random_range(-0.9..0.9)).collect(),
            targets: (0..rows).map(|_| rng.random_range(-3.0..3.0)).collect(),
            net,
        }
    }

    /// `value_coeff · mean (v − target)²` with `value_coeff = 0.5`.
    pub fn loss(&self, values: &[f64], grads: Option<&mut [f64]>) -> f64 {
        let mut t = Tape::new(values);
        let fwd = self.net.record_rows(&mut t, &self.states, &self.hidden, self.rows).unwrap();
        let tgt = t.constant_rows(self.targets.clone(), self.rows);
        let d = t.sub(fwd.value, tgt);
        let sq = t.square(d);
        let s = t.sum(sq);
        let loss = t.scale(s, 0.5 / self.rows as f64);
        if let Some(g) = grads {
            t.backward(loss, g);
        }
        t.scalar(loss)
    }
}

pub const FD_STEP: f64 = 1e-5;
pub const GRAD_TOLERANCE: f64 = 1e-4;

pub fn policy_gradient_error(seed: u64) -> f64 {
    let case = PolicyCase::random(seed);
    worst_gradient_error(&case.net.params, FD_STEP, |v, g| case.loss(v, g))
}

pub fn critic_gradient_error(seed: u64) -> f64 {
    let case = CriticCase::random(seed);
    worst_gradient_error(&case.net.params, FD_STEP, |v, g| case.loss(v, g))
}
