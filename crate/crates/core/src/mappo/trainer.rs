use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use super::actors::{active_decisions, ActorSet, Sampling};
use super::buffer::{AgentSample, RolloutBuffer, StepSample};
use super::gae::{compute_gae, normalize};
use super::loss::{clipped_surrogate_rows, log_prob_and_entropy_rows};
use super::value_norm::ValueNormalizer;
use crate::config::ScenarioConfig;
use crate::env::{Env, Observation};
use crate::metrics::MetricsRow;
use crate::neural::{checkpoint, Adam, CriticNet, CriticSpec, Tape};
use crate::rng::{indexed_stream_rng, mix_seed, stream_rng, Stream};
use crate::{Error, Result};

/// How the actors pick actions while collecting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RolloutMode {
    Sample,
    Greedy,
}

/// Loss statistics of one update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpdateStats {
    pub policy_loss: f64,
    /// Per-head entropy averaged over active slots.
    pub entropy: f64,
    pub value_loss: f64,
    pub policy_minibatches: usize,
    pub critic_minibatches: usize,
}

struct EnvSlot {
    env: Env,
    obs: Vec<Observation>,
    actor_hidden: Vec<Vec<f64>>,
    critic_hidden: Vec<f64>,
    episode: u64,
    index: u32,
    action_rng: ChaCha8Rng,
}

/// MAPPO learner: shared-reward actors with a centralized recurrent critic.
pub struct Trainer {
    cfg: ScenarioConfig,
    seed: u64,
    slots: Vec<EnvSlot>,
    actors: ActorSet,
    critic: CriticNet,
    actor_opt: Vec<Adam>,
    critic_opt: Adam,
    value_norm: ValueNormalizer,
    shuffle_rng: ChaCha8Rng,
    env_steps: u64,
    updates: u64,
}

fn episode_seed(seed: u64, env_index: u32, episode: u64) -> u64 {
    mix_seed(mix_seed(seed, u64::from(env_index)), episode)
}

impl Trainer {
    pub fn new(cfg: ScenarioConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let tc = cfg.train.clone();
        let mut slots = Vec::with_capacity(tc.num_envs);
        for i in 0..tc.num_envs as u32 {
            let mut env = Env::new(cfg.clone(), episode_seed(seed, i, 0))?;
            let obs = env.reset(episode_seed(seed, i, 0));
            slots.push(EnvSlot {
                env,
                obs,
                actor_hidden: Vec::new(),
                critic_hidden: Vec::new(),
                episode: 0,
                index: i,
                action_rng: indexed_stream_rng(seed, Stream::ActionSampling, i),
            });
        }
        let env = &slots[0].env;
        let mut init_rng = stream_rng(seed, Stream::WeightInit);
        let actors = ActorSet::init(
            ActorSet::spec_for(env, tc.hidden_dim),
            env.num_agents(),
            tc.shared_policy,
            cfg.world.action_mode,
            &mut init_rng,
        );
        let critic = CriticNet::init(
            CriticSpec { input_dim: env.global_state_width(), hidden: tc.hidden_dim },
            &mut init_rng,
        );
        let adam = |len| Adam::new(len, tc.adam_beta1, tc.adam_beta2, tc.adam_eps);
        let actor_opt = actors.nets.iter().map(|n| adam(n.params.len())).collect();
        let critic_opt = adam(critic.params.len());
        let mut t = Self {
            value_norm: ValueNormalizer::new(tc.value_normalization),
            shuffle_rng: stream_rng(seed, Stream::Shuffle),
            cfg,
            seed,
            slots,
            actors,
            critic,
            actor_opt,
            critic_opt,
            env_steps: 0,
            updates: 0,
        };
        for i in 0..t.slots.len() {
            t.reset_hidden(i);
        }
        Ok(t)
    }

    fn reset_hidden(&mut self, i: usize) {
        let n = self.slots[i].env.num_agents();
        let h = self.actors.nets[0].zero_hidden();
        self.slots[i].actor_hidden = vec![h; n];
        self.slots[i].critic_hidden = self.critic.zero_hidden();
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn actors(&self) -> &ActorSet {
        &self.actors
    }

    pub fn critic(&self) -> &CriticNet {
        &self.critic
    }

    pub fn env_steps(&self) -> u64 {
        self.env_steps
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Runs every env instance for `length` steps with the current
    /// parameters. Episodes that finish are reset in place with a fresh
    /// seed and zeroed recurrent state.
    pub fn collect_rollout(&mut self, length: usize, mode: RolloutMode) -> Result<RolloutBuffer> {
        let mut buf = RolloutBuffer::default();
        for i in 0..self.slots.len() {
            let mut seq = Vec::with_capacity(length);
            for _ in 0..length {
                seq.push(self.step_slot(i, mode)?);
            }
            let slot = &self.slots[i];
            let bootstrap = if seq.last().is_some_and(|s| s.done) {
                0.0
            } else {
                let state = slot.env.global_state_vector();
                let (v, _) = self.critic.forward(&state, &slot.critic_hidden)?;
                self.value_norm.denormalize(v)
            };
            buf.envs.push(seq);
            buf.bootstrap.push(bootstrap);
        }
        self.env_steps += buf.num_steps() as u64;
        Ok(buf)
    }

    fn step_slot(&mut self, i: usize, mode: RolloutMode) -> Result<StepSample> {
        let slot = &mut self.slots[i];
        let state = slot.env.global_state_vector();
        let (v, critic_out) = self.critic.forward(&state, &slot.critic_hidden)?;
        let mut agents = Vec::with_capacity(slot.obs.len());
        let mut joint = Vec::with_capacity(slot.obs.len());
        for (u, obs) in slot.obs.iter().enumerate() {
            let step = match mode {
                RolloutMode::Sample => self.actors.act(
                    u,
                    obs,
                    &slot.actor_hidden[u],
                    &mut Sampling::Stochastic(&mut slot.action_rng),
                )?,
                RolloutMode::Greedy => self.actors.act::<ChaCha8Rng>(
                    u,
                    obs,
                    &slot.actor_hidden[u],
                    &mut Sampling::Greedy,
                )?,
            };
            agents.push(AgentSample {
                agent: u,
                obs: obs.normalized.clone(),
                hidden: std::mem::replace(&mut slot.actor_hidden[u], step.hidden_out),
                action: step.action.clone(),
                log_prob: step.log_prob,
                active: active_decisions(self.actors.action_mode, obs.active),
            });
            joint.push(step.action);
        }
        let out = slot.env.step(&joint)?;
        let sample = StepSample {
            agents,
            state,
            critic_hidden: std::mem::replace(&mut slot.critic_hidden, critic_out),
            value: self.value_norm.denormalize(v),
            reward: out.reward,
            done: out.done,
            step_ee: out.info.eval.energy.ee_bits_per_joule,
            success_rate: out.info.eval.success_rate,
        };
        if out.done {
            slot.episode += 1;
            let s = episode_seed(self.seed, slot.index, slot.episode);
            slot.obs = slot.env.reset(s);
            self.reset_hidden(i);
        } else {
            slot.obs = out.observations;
        }
        Ok(sample)
    }

    /// Clipped-surrogate update of the actors and squared-error update of
    /// the critic over `epochs` shuffled passes.
    pub fn ppo_update(&mut self, buf: &RolloutBuffer) -> Result<UpdateStats> {
        let tc = self.cfg.train.clone();
        let mut advantages: Vec<Vec<f64>> = Vec::with_capacity(buf.envs.len());
        let mut targets: Vec<Vec<f64>> = Vec::with_capacity(buf.envs.len());
        for (seq, &boot) in buf.envs.iter().zip(&buf.bootstrap) {
            let r: Vec<f64> = seq.iter().map(|s| s.reward).collect();
            let v: Vec<f64> = seq.iter().map(|s| s.value).collect();
            let d: Vec<bool> = seq.iter().map(|s| s.done).collect();
            let (a, t) = compute_gae(&r, &v, &d, boot, tc.discount, tc.gae_lambda);
            advantages.push(a);
            targets.push(t);
        }
        if tc.normalize_advantages {
            let mut flat: Vec<f64> = advantages.iter().flatten().copied().collect();
            normalize(&mut flat);
            let mut it = flat.into_iter();
            for a in advantages.iter_mut().flatten() {
                *a = it.next().expect("same length");
            }
        }
        let all_targets: Vec<f64> = targets.iter().flatten().copied().collect();
        self.value_norm.update(&all_targets);

        // (env, t, agent) for policy samples that carry a decision
        let mut policy_idx: Vec<(usize, usize, usize)> = Vec::new();
        let mut critic_idx: Vec<(usize, usize)> = Vec::new();
        for (e, seq) in buf.envs.iter().enumerate() {
            for (t, s) in seq.iter().enumerate() {
                critic_idx.push((e, t));
                for (k, a) in s.agents.iter().enumerate() {
                    if a.active > 0 {
                        policy_idx.push((e, t, k));
                    }
                }
            }
        }

        let mut stats = UpdateStats::default();
        let mb = tc.minibatch.max(1);
        for _ in 0..tc.epochs {
            policy_idx.shuffle(&mut self.shuffle_rng);
            for chunk in policy_idx.chunks(mb) {
                let (loss, ent) = self.policy_minibatch(buf, &advantages, chunk)?;
                stats.policy_loss += loss;
                stats.entropy += ent;
                stats.policy_minibatches += 1;
            }
            critic_idx.shuffle(&mut self.shuffle_rng);
            for chunk in critic_idx.chunks(mb) {
                stats.value_loss += self.critic_minibatch(buf, &targets, chunk)?;
                stats.critic_minibatches += 1;
            }
        }
        if stats.policy_minibatches > 0 {
            stats.policy_loss /= stats.policy_minibatches as f64;
            stats.entropy /= stats.policy_minibatches as f64;
        }
        if stats.critic_minibatches > 0 {
            stats.value_loss /= stats.critic_minibatches as f64;
        }
        self.updates += 1;
        Ok(stats)
    }

    /// One optimizer step on the actors; returns (mean surrogate loss,
    /// mean per-head entropy).
    fn policy_minibatch(
        &mut self,
        buf: &RolloutBuffer,
        advantages: &[Vec<f64>],
        chunk: &[(usize, usize, usize)],
    ) -> Result<(f64, f64)> {
        let tc = &self.cfg.train;
        let n = chunk.len() as f64;
        let (mut loss_sum, mut ent_sum) = (0.0, 0.0);
        for which in 0..self.actors.nets.len() {
            let rows: Vec<(&AgentSample, f64)> = chunk
                .iter()
                .map(|&(e, t, k)| (&buf.envs[e][t].agents[k], advantages[e][t]))
                .filter(|(s, _)| self.actors.net_index(s.agent) == which)
                .collect();
            if rows.is_empty() {
                continue;
            }
            let net = &mut self.actors.nets[which];
            let obs: Vec<f64> = rows.iter().flat_map(|(s, _)| s.obs.iter().copied()).collect();
            let hid: Vec<f64> = rows.iter().flat_map(|(s, _)| s.hidden.iter().copied()).collect();
            let actions: Vec<&_> = rows.iter().map(|(s, _)| &s.action).collect();
            let active: Vec<usize> = rows.iter().map(|(s, _)| s.active).collect();
            let old: Vec<f64> = rows.iter().map(|(s, _)| s.log_prob).collect();
            let adv: Vec<f64> = rows.iter().map(|(_, a)| *a).collect();

            let mut grads = vec![0.0; net.params.len()];
            {
                let mut tape = Tape::new(&net.params.values);
                let fwd = net.record_rows(&mut tape, &obs, &hid, rows.len())?;
                let (logp, ent) = log_prob_and_entropy_rows(&mut tape, &fwd, &actions, &active);
                let surr = clipped_surrogate_rows(&mut tape, logp, &old, &adv, tc.clip);
                // minimize −surr − c·H, averaged over the minibatch
                let bonus = tape.scale(ent, tc.entropy_coeff);
                let obj = tape.add(surr, bonus);
                let obj = tape.sum(obj);
                let loss = tape.scale(obj, -1.0 / n);
                let sv: f64 = tape.value(surr).iter().sum();
                let ev: f64 = tape.value(ent).iter().sum();
                if !sv.is_finite() || !ev.is_finite() {
                    return Err(Error::NonFinite(format!("policy loss at update {}", self.updates)));
                }
                loss_sum -= sv;
                ent_sum += ev / 3.0;
                tape.backward(loss, &mut grads);
            }
            if grads.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFinite(format!("actor gradient at update {}", self.updates)));
            }
            net.params.grads.copy_from_slice(&grads);
            net.params.clip_grad_norm(tc.grad_clip_norm);
            self.actor_opt[which].step(&mut net.params, tc.lr);
        }
        Ok((loss_sum / n, ent_sum / n))
    }

    fn critic_minibatch(
        &mut self,
        buf: &RolloutBuffer,
        targets: &[Vec<f64>],
        chunk: &[(usize, usize)],
    ) -> Result<f64> {
        let tc = &self.cfg.train;
        let n = chunk.len() as f64;
        let states: Vec<f64> =
            chunk.iter().flat_map(|&(e, t)| buf.envs[e][t].state.iter().copied()).collect();
        let hid: Vec<f64> =
            chunk.iter().flat_map(|&(e, t)| buf.envs[e][t].critic_hidden.iter().copied()).collect();
        let tgt: Vec<f64> =
            chunk.iter().map(|&(e, t)| self.value_norm.normalize(targets[e][t])).collect();
        let mut grads = vec![0.0; self.critic.params.len()];
        let mse;
        {
            let mut tape = Tape::new(&self.critic.params.values);
            let fwd = self.critic.record_rows(&mut tape, &states, &hid, chunk.len())?;
            let tgt = tape.constant_rows(tgt, chunk.len());
            let d = tape.sub(fwd.value, tgt);
            let sq = tape.square(d);
            let total = tape.sum(sq);
            mse = tape.scalar(total) / n;
            if !mse.is_finite() {
                return Err(Error::NonFinite(format!("critic loss at update {}", self.updates)));
            }
            let loss = tape.scale(total, tc.value_coeff / n);
            tape.backward(loss, &mut grads);
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!("critic gradient at update {}", self.updates)));
        }
        self.critic.params.grads.copy_from_slice(&grads);
        self.critic.params.clip_grad_norm(tc.grad_clip_norm);
        self.critic_opt.step(&mut self.critic.params, tc.lr);
        Ok(mse)
    }

    /// One collect + update cycle, summarized as a metrics row.
    pub fn iterate(&mut self) -> Result<MetricsRow> {
        let len = self.cfg.train.rollout_len;
        let buf = self.collect_rollout(len, RolloutMode::Sample)?;
        let stats = self.ppo_update(&buf)?;
        Ok(MetricsRow {
            update_index: self.updates - 1,
            env_steps: self.env_steps,
            mean_reward: buf.mean_reward(),
            mean_step_ee: buf.mean_step_ee(),
            success_rate: buf.mean_success_rate(),
            entropy: stats.entropy,
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
        })
    }

    /// Number of updates a full run will perform.
    pub fn planned_updates(&self) -> u64 {
        let per = (self.cfg.train.rollout_len * self.slots.len()) as u64;
        if per == 0 {
            0
        } else {
            self.cfg.train.total_env_steps / per
        }
    }

    /// Alternates collection and updates until the step budget would be
    /// exceeded. `on_update` sees the trainer after every update.
    pub fn train<F>(&mut self, mut on_update: F) -> Result<Vec<MetricsRow>>
    where
        F: FnMut(&Trainer, &MetricsRow) -> Result<()>,
    {
        let mut rows = Vec::new();
        while self.updates < self.planned_updates() {
            let row = self.iterate()?;
            on_update(self, &row)?;
            rows.push(row);
        }
        Ok(rows)
    }

    pub fn save_critic(&self, path: &std::path::Path) -> Result<()> {
        checkpoint::save(path, "critic", &self.critic)
    }
}

/// Trains one seed end to end without writing files.
pub fn train(cfg: &ScenarioConfig, seed: u64) -> Result<(Trainer, Vec<MetricsRow>)> {
    let mut t = Trainer::new(cfg.clone(), seed)?;
    let rows = t.train(|_, _| Ok(()))?;
    Ok((t, rows))
}
