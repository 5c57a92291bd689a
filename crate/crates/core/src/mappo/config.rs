use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecurrentCell {
    #[default]
    Gru,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    #[default]
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
}

/// Learner hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub discount: f64,
    pub clip: f64,
    pub epochs: usize,
    pub minibatch: usize,
    /// Environment steps to train for (summed over env instances).
    pub total_env_steps: u64,
    /// Steps per env instance collected before each update.
    pub rollout_len: usize,
    /// Soft-update coefficient from the published table. MAPPO has no
    /// target network, so it is carried but unused.
    pub tau: f64,
    pub gae_lambda: f64,
    pub entropy_coeff: f64,
    pub value_coeff: f64,
    pub grad_clip_norm: f64,
    pub hidden_dim: usize,
    pub architecture: RecurrentCell,
    pub optimizer: OptimizerKind,
    pub activation: Activation,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub normalize_advantages: bool,
    /// Critic regresses running-normalized returns.
    pub value_normalization: bool,
    /// One actor shared by all UAVs; otherwise one actor per UAV.
    pub shared_policy: bool,
    pub num_envs: usize,
    /// Write a checkpoint every this many updates (0 = only at the end).
    pub checkpoint_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-4,
            discount: 0.99,
            clip: 0.2,
            epochs: 15,
            minibatch: 16,
            total_env_steps: 2_000_000,
            rollout_len: 32,
            tau: 0.01,
            gae_lambda: 0.95,
            entropy_coeff: 0.01,
            value_coeff: 0.5,
            grad_clip_norm: 10.0,
            hidden_dim: 128,
            architecture: RecurrentCell::Gru,
            optimizer: OptimizerKind::Adam,
            activation: Activation::Relu,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            normalize_advantages: true,
            value_normalization: true,
            shared_policy: true,
            num_envs: 1,
            checkpoint_every: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lr > 0.0
            && self.discount > 0.0
            && self.discount < 1.0
            && self.clip > 0.0
            && self.epochs >= 1
            && self.minibatch >= 1
            && self.rollout_len >= 1
            && (0.0..=1.0).contains(&self.gae_lambda)
            && self.entropy_coeff >= 0.0
            && self.value_coeff >= 0.0
            && self.grad_clip_norm > 0.0
            && self.hidden_dim >= 1
            && self.num_envs >= 1
            && self.adam_eps > 0.0
            && (0.0..1.0).contains(&self.adam_beta1)
            && (0.0..1.0).contains(&self.adam_beta2);
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid training parameters: {self:?}")))
        }
    }
}
