//! Decentralized execution: each UAV acts on its own observation only.
//!
//! Controllers receive nothing but per-agent [`Observation`]s, so no
//! execution path can reach the global state vector or the critic.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::actors::{ActorSet, Sampling};
use crate::config::ScenarioConfig;
use crate::env::{AgentAction, Env, Observation};
use crate::Result;

pub trait Controller {
    fn name(&self) -> &str;
    /// Called at the start of every episode.
    fn reset(&mut self, num_agents: usize);
    fn act(&mut self, agent: usize, obs: &Observation) -> Result<AgentAction>;
    /// Errors if the controller cannot drive `env`.
    fn check(&self, _env: &Env) -> Result<()> {
        Ok(())
    }
}

/// Greedy decoding of trained actors with per-agent recurrent state.
pub struct DecentralizedController {
    actors: ActorSet,
    hidden: Vec<Vec<f64>>,
}

impl DecentralizedController {
    pub fn new(actors: ActorSet) -> Self {
        Self { actors, hidden: Vec::new() }
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Ok(Self::new(ActorSet::load(path)?))
    }

    pub fn actors(&self) -> &ActorSet {
        &self.actors
    }
}

impl Controller for DecentralizedController {
    fn name(&self) -> &str {
        "mappo"
    }

    fn reset(&mut self, num_agents: usize) {
        self.hidden = vec![self.actors.nets[0].zero_hidden(); num_agents];
    }

    fn act(&mut self, agent: usize, obs: &Observation) -> Result<AgentAction> {
        let step =
            self.actors.act::<ChaCha8Rng>(agent, obs, &self.hidden[agent], &mut Sampling::Greedy)?;
        self.hidden[agent] = step.hidden_out;
        Ok(step.action)
    }

    fn check(&self, env: &Env) -> Result<()> {
        self.actors.check_compatible(env)
    }
}

/// Per-episode aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStats {
    pub seed: u64,
    pub steps: usize,
    pub mean_step_ee: f64,
    /// Sum of per-step EE over the episode.
    pub episode_ee: f64,
    pub success_rate: f64,
    pub mean_margin_db: f64,
    pub min_margin_db: f64,
    pub total_reward: f64,
    pub mean_reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub policy: String,
    pub num_eds: usize,
    pub num_uavs: usize,
    pub episodes: Vec<EpisodeStats>,
    pub mean_step_ee: f64,
    pub mean_episode_ee: f64,
    pub success_rate: f64,
    pub mean_margin_db: f64,
    pub min_margin_db: f64,
    pub mean_reward: f64,
}

pub fn run_episode(env: &mut Env, ctrl: &mut dyn Controller, seed: u64) -> Result<EpisodeStats> {
    ctrl.check(env)?;
    let mut obs = env.reset(seed);
    ctrl.reset(env.num_agents());
    let (mut ee, mut succ, mut margin, mut reward) = (0.0, 0.0, 0.0, 0.0);
    let mut min_margin = f64::INFINITY;
    let mut steps = 0;
    loop {
        let joint = obs
            .iter()
            .enumerate()
            .map(|(u, o)| ctrl.act(u, o))
            .collect::<Result<Vec<_>>>()?;
        let out = env.step(&joint)?;
        let e = &out.info.eval;
        ee += e.energy.ee_bits_per_joule;
        succ += e.success_rate;
        margin += e.mean_margin_db;
        reward += out.reward;
        for m in e.links.iter().flatten().map(|l| l.margin_db) {
            min_margin = min_margin.min(m);
        }
        steps += 1;
        obs = out.observations;
        if out.done {
            break;
        }
    }
    let n = steps as f64;
    Ok(EpisodeStats {
        seed,
        steps,
        mean_step_ee: ee / n,
        episode_ee: ee,
        success_rate: succ / n,
        mean_margin_db: margin / n,
        min_margin_db: if min_margin.is_finite() { min_margin } else { 0.0 },
        total_reward: reward,
        mean_reward: reward / n,
    })
}

/// Runs one episode per seed and averages.
pub fn evaluate(cfg: &ScenarioConfig, ctrl: &mut dyn Controller, seeds: &[u64]) -> Result<EvalReport> {
    let first = seeds.first().copied().unwrap_or(0);
    let mut env = Env::new(cfg.clone(), first)?;
    let episodes = seeds
        .iter()
        .map(|&s| run_episode(&mut env, ctrl, s))
        .collect::<Result<Vec<_>>>()?;
    let avg = |f: fn(&EpisodeStats) -> f64| {
        if episodes.is_empty() {
            0.0
        } else {
            episodes.iter().map(f).sum::<f64>() / episodes.len() as f64
        }
    };
    Ok(EvalReport {
        policy: ctrl.name().to_string(),
        num_eds: cfg.world.num_eds,
        num_uavs: cfg.world.num_uavs,
        mean_step_ee: avg(|e| e.mean_step_ee),
        mean_episode_ee: avg(|e| e.episode_ee),
        success_rate: avg(|e| e.success_rate),
        mean_margin_db: avg(|e| e.mean_margin_db),
        min_margin_db: episodes.iter().map(|e| e.min_margin_db).reduce(f64::min).unwrap_or(0.0),
        mean_reward: avg(|e| e.mean_reward),
        episodes,
    })
}
