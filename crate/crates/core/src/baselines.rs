//! Comparison policies and a brute-force per-step EE maximizer.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{self, SnrThresholdTable};
use crate::env::{AgentAction, Env, Observation, RadioAssignment, RadioSets};
use crate::mappo::Controller;
use crate::{Error, Result};

/// Largest joint allocation space the oracle will enumerate.
pub const ORACLE_LIMIT: u128 = 1_000_000;

/// Uniform draw on every head of every slot, padded slots included so the
/// number of draws per call is fixed.
pub fn random_policy<R: Rng + ?Sized>(obs: &Observation, sets: &RadioSets, rng: &mut R) -> AgentAction {
    let [n, j, m] = sets.sizes();
    let slots = (0..obs.slots().max(1))
        .map(|_| RadioAssignment {
            sf: rng.random_range(0..n),
            tp: rng.random_range(0..j),
            bw: rng.random_range(0..m),
        })
        .collect();
    AgentAction { slots }
}

/// Cheapest combination that clears the demodulation threshold on a link
/// with linear gain `gain`. Among equal powers the wider bandwidth wins,
/// then the lower SF. With nothing feasible, the most robust choice.
pub fn greedy_assignment(
    gain: f64,
    sets: &RadioSets,
    thresholds: &SnrThresholdTable,
    noise_dbm: f64,
) -> RadioAssignment {
    let mut best: Option<(RadioAssignment, f64, u32, u8)> = None;
    for (sf, &sf_v) in sets.sf_set.iter().enumerate() {
        for (tp, &tp_v) in sets.tp_set_dbm.iter().enumerate() {
            for (bw, &bw_v) in sets.bw_set_khz.iter().enumerate() {
                let thr = thresholds
                    .threshold_db(sf_v, bw_v)
                    .expect("radio sets validated against the table");
                let snr_db = channel::linear_to_db(channel::snr_linear(tp_v, gain, noise_dbm));
                if snr_db < thr {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((_, p, w, s)) => {
                        tp_v < p || (tp_v == p && (bw_v > w || (bw_v == w && sf_v < s)))
                    }
                };
                if better {
                    best = Some((RadioAssignment { sf, tp, bw }, tp_v, bw_v, sf_v));
                }
            }
        }
    }
    best.map(|b| b.0).unwrap_or_else(|| robust_assignment(sets))
}

/// Max TP, SF12 (or the largest SF offered), 125 kHz (or the narrowest).
pub fn robust_assignment(sets: &RadioSets) -> RadioAssignment {
    let arg = |it: &mut dyn Iterator<Item = (usize, f64)>| {
        it.fold((0, f64::NEG_INFINITY), |b, (i, x)| if x > b.1 { (i, x) } else { b }).0
    };
    RadioAssignment {
        sf: arg(&mut sets.sf_set.iter().map(|&s| f64::from(s)).enumerate()),
        tp: arg(&mut sets.tp_set_dbm.iter().copied().enumerate()),
        bw: arg(&mut sets.bw_set_khz.iter().map(|&b| -f64::from(b)).enumerate()),
    }
}

/// Greedy action from a local observation (the fourth feature is the raw
/// link gain).
pub fn greedy_policy(
    obs: &Observation,
    sets: &RadioSets,
    thresholds: &SnrThresholdTable,
    noise_dbm: f64,
) -> AgentAction {
    let slots = (0..obs.slots().max(1))
        .map(|i| {
            if i < obs.active {
                greedy_assignment(obs.rows[i][3], sets, thresholds, noise_dbm)
            } else {
                RadioAssignment::default()
            }
        })
        .collect();
    AgentAction { slots }
}

pub struct RandomController {
    sets: RadioSets,
    rng: ChaCha8Rng,
}

impl RandomController {
    pub fn new(sets: RadioSets, rng: ChaCha8Rng) -> Self {
        Self { sets, rng }
    }
}

impl Controller for RandomController {
    fn name(&self) -> &str {
        "random"
    }

    fn reset(&mut self, _num_agents: usize) {}

    fn act(&mut self, _agent: usize, obs: &Observation) -> Result<AgentAction> {
        Ok(random_policy(obs, &self.sets, &mut self.rng))
    }
}

pub struct GreedyController {
    sets: RadioSets,
    thresholds: SnrThresholdTable,
    noise_dbm: f64,
}

impl GreedyController {
    pub fn new(sets: RadioSets, thresholds: SnrThresholdTable, noise_dbm: f64) -> Self {
        Self { sets, thresholds, noise_dbm }
    }

    pub fn for_env(env: &Env) -> Self {
        let cfg = env.config();
        Self::new(cfg.radio.clone(), env.thresholds().clone(), cfg.channel.noise_dbm)
    }
}

impl Controller for GreedyController {
    fn name(&self) -> &str {
        "greedy"
    }

    fn reset(&mut self, _num_agents: usize) {}

    fn act(&mut self, _agent: usize, obs: &Observation) -> Result<AgentAction> {
        Ok(greedy_policy(obs, &self.sets, &self.thresholds, self.noise_dbm))
    }
}

/// Sets the oracle searches by default.
pub fn default_restricted_sets() -> RadioSets {
    RadioSets { sf_set: vec![7, 12], tp_set_dbm: vec![2.0, 14.0], bw_set_khz: vec![125] }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// Per-ED choice as indices into the searched sets; `None` for EDs
    /// without a UAV.
    pub allocation: Vec<Option<RadioAssignment>>,
    pub ee_bits_per_joule: f64,
    pub evaluations: u64,
}

/// `combos^associated`, or `None` on overflow.
pub fn search_space_size(combos: usize, associated: usize) -> Option<u128> {
    u32::try_from(associated).ok().and_then(|k| (combos as u128).checked_pow(k))
}

/// Per-step EE of an allocation at the env's current association and
/// gains, computed in the dB domain independently of [`Env::evaluate`].
pub fn allocation_ee(env: &Env, sets: &RadioSets, allocation: &[Option<RadioAssignment>]) -> f64 {
    let s = env.state();
    let ch = &env.config().channel;
    let assignment = &s.association.assignment;
    let rx_dbm: Vec<Option<f64>> = allocation
        .iter()
        .enumerate()
        .map(|(v, a)| {
            let (a, u) = ((*a)?, assignment[v]?);
            Some(sets.tp_dbm(a) + 10.0 * s.gains[v][u].log10() - ch.noise_dbm)
        })
        .collect();
    let mut rate = vec![0.0; s.uavs.len()];
    let mut tx_w = vec![0.0; s.uavs.len()];
    for (v, a) in allocation.iter().enumerate() {
        let (Some(a), Some(u), Some(own)) = (*a, assignment[v], rx_dbm[v]) else {
            continue;
        };
        let mut interference = 0.0;
        for (w, b) in allocation.iter().enumerate() {
            let (Some(b), Some(other)) = (*b, rx_dbm[w]) else {
                continue;
            };
            let same_bw = !ch.same_bw_interference_only || sets.bw_set_khz[b.bw] == sets.bw_set_khz[a.bw];
            if w != v && sets.sf_set[b.sf] == sets.sf_set[a.sf] && same_bw {
                interference += 10f64.powf(other / 10.0);
            }
        }
        let sinr = 10f64.powf(own / 10.0) / (1.0 + interference);
        rate[u] += f64::from(sets.bw_set_khz[a.bw]) * 1e3 * (1.0 + sinr).log2();
        tx_w[u] += 10f64.powf((sets.tp_dbm(a) - 30.0) / 10.0);
    }
    let hover = env.hover_power_w();
    rate.iter().zip(&tx_w).map(|(r, p)| r / (p + hover)).sum()
}

/// Enumerates every joint allocation over the associated EDs and returns
/// the EE maximizer. Allocations are visited in lexicographic order of
/// their per-ED combination index and only a strict improvement replaces
/// the incumbent, so ties resolve to the lexicographically first.
pub fn exhaustive_oracle(env: &Env, sets: &RadioSets) -> Result<OracleResult> {
    sets.validate()?;
    for &sf in &sets.sf_set {
        for &bw in &sets.bw_set_khz {
            env.thresholds().threshold_db(sf, bw)?;
        }
    }
    let assignment = &env.state().association.assignment;
    let live: Vec<usize> = (0..assignment.len()).filter(|&v| assignment[v].is_some()).collect();
    let combos = sets.combos();
    let size = search_space_size(combos, live.len())
        .filter(|&n| n <= ORACLE_LIMIT)
        .ok_or(Error::SearchSpace {
            size: search_space_size(combos, live.len()).unwrap_or(u128::MAX),
            limit: ORACLE_LIMIT,
        })?;

    let mut alloc: Vec<Option<RadioAssignment>> = vec![None; assignment.len()];
    let mut best: Option<(Vec<Option<RadioAssignment>>, f64)> = None;
    let mut digits = vec![0usize; live.len()];
    for n in 0..size {
        if n > 0 {
            // odometer with the last associated ED fastest
            for d in digits.iter_mut().rev() {
                *d += 1;
                if *d < combos {
                    break;
                }
                *d = 0;
            }
        }
        for (&v, &d) in live.iter().zip(&digits) {
            alloc[v] = Some(sets.decode(d));
        }
        let ee = allocation_ee(env, sets, &alloc);
        if best.as_ref().is_none_or(|b| ee > b.1) {
            best = Some((alloc.clone(), ee));
        }
    }
    let (allocation, ee) = best.expect("search space has at least one point");
    Ok(OracleResult { allocation, ee_bits_per_joule: ee, evaluations: size as u64 })
}
