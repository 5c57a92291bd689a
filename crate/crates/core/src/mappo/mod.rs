//! Multi-agent PPO with a centralized critic.

pub mod actors;
pub mod buffer;
mod config;
pub mod execute;
pub mod gae;
pub mod loss;
pub mod trainer;
pub mod value_norm;

pub use actors::{ActorSet, ActorStep, Sampling};
pub use buffer::{AgentSample, RolloutBuffer, StepSample};
pub use config::{Activation, OptimizerKind, RecurrentCell, TrainConfig};
pub use execute::{evaluate, run_episode, Controller, DecentralizedController, EpisodeStats, EvalReport};
pub use trainer::{train, RolloutMode, Trainer, UpdateStats};
pub use value_norm::ValueNormalizer;
