use rand::Rng;
use serde::{Deserialize, Serialize};

use super::loss::joint_log_prob;
use crate::env::{ActionMode, AgentAction, Env, Observation, RadioAssignment};
use crate::neural::{categorical, checkpoint, PolicyNet, PolicySpec};
use crate::{Error, Result};

/// How actions are drawn from the policy heads.
pub enum Sampling<'a, R: Rng + ?Sized> {
    Stochastic(&'a mut R),
    Greedy,
}

/// The agents' actor networks: one shared net, or one per UAV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorSet {
    pub nets: Vec<PolicyNet>,
    pub shared: bool,
    pub num_agents: usize,
    pub action_mode: ActionMode,
}

/// Output of one agent's forward pass during rollout or execution.
#[derive(Debug, Clone)]
pub struct ActorStep {
    pub action: AgentAction,
    /// Joint log-probability over active decision slots.
    pub log_prob: f64,
    pub hidden_out: Vec<f64>,
    /// Per-head entropy averaged over active slots.
    pub entropy: f64,
}

/// Number of decision slots and how many of them are live for an
/// observation with `active` served EDs.
pub fn decision_slots(mode: ActionMode, quota: usize) -> usize {
    match mode {
        ActionMode::PerEd => quota,
        ActionMode::Shared => 1,
    }
}

pub fn active_decisions(mode: ActionMode, active: usize) -> usize {
    match mode {
        ActionMode::PerEd => active,
        ActionMode::Shared => active.min(1),
    }
}

impl ActorSet {
    pub fn spec_for(env: &Env, hidden: usize) -> PolicySpec {
        let cfg = env.config();
        PolicySpec {
            input_dim: env.observation_width(),
            hidden,
            slots: decision_slots(cfg.world.action_mode, env.quota()),
            heads: cfg.radio.sizes(),
        }
    }

    pub fn init<R: Rng + ?Sized>(
        spec: PolicySpec,
        num_agents: usize,
        shared: bool,
        action_mode: ActionMode,
        rng: &mut R,
    ) -> Self {
        let count = if shared { 1 } else { num_agents };
        Self {
            nets: (0..count).map(|_| PolicyNet::init(spec, rng)).collect(),
            shared,
            num_agents,
            action_mode,
        }
    }

    pub fn spec(&self) -> PolicySpec {
        self.nets[0].spec
    }

    pub fn net_index(&self, agent: usize) -> usize {
        if self.shared {
            0
        } else {
            agent
        }
    }

    pub fn net(&self, agent: usize) -> &PolicyNet {
        &self.nets[self.net_index(agent)]
    }

    pub fn act<R: Rng + ?Sized>(
        &self,
        agent: usize,
        obs: &Observation,
        hidden: &[f64],
        sampling: &mut Sampling<'_, R>,
    ) -> Result<ActorStep> {
        let net = self.net(agent);
        let (dists, hidden_out) = net.forward(&obs.normalized, hidden)?;
        // every slot is drawn so that RNG use does not depend on the load
        let slots = dists
            .iter()
            .map(|[sf, tp, bw]| {
                let pick = |lp: &[f64], s: &mut Sampling<'_, R>| match s {
                    Sampling::Stochastic(rng) => categorical::sample(lp, *rng),
                    Sampling::Greedy => categorical::argmax(lp),
                };
                RadioAssignment {
                    sf: pick(sf, sampling),
                    tp: pick(tp, sampling),
                    bw: pick(bw, sampling),
                }
            })
            .collect();
        let action = AgentAction { slots };
        let live = active_decisions(self.action_mode, obs.active);
        let entropy = if live == 0 {
            0.0
        } else {
            dists
                .iter()
                .take(live)
                .map(|s| s.iter().map(|h| categorical::entropy(h)).sum::<f64>())
                .sum::<f64>()
                / (3 * live) as f64
        };
        Ok(ActorStep {
            log_prob: joint_log_prob(&dists, &action, live),
            action,
            hidden_out,
            entropy,
        })
    }

    /// Errors unless this actor set can drive `env`.
    pub fn check_compatible(&self, env: &Env) -> Result<()> {
        let want = Self::spec_for(env, self.spec().hidden);
        let cfg = env.config();
        if want != self.spec()
            || self.action_mode != cfg.world.action_mode
            || (!self.shared && self.num_agents != env.num_agents())
        {
            return Err(Error::Checkpoint(format!(
                "policy {:?} ({:?}, {} agents, shared={}) does not fit scenario {:?} ({:?}, {} agents)",
                self.spec(),
                self.action_mode,
                self.num_agents,
                self.shared,
                want,
                cfg.world.action_mode,
                env.num_agents()
            )));
        }
        Ok(())
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        checkpoint::save(path, "policy", self)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let mut set: Self = checkpoint::load(path, "policy")?;
        for n in &mut set.nets {
            n.params.zero_grads();
        }
        Ok(set)
    }
}
