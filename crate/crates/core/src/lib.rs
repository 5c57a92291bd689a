//! Uplink energy-efficiency simulation and multi-agent resource allocation
//! for LoRa gateways mounted on hovering UAVs.
//!
//! The crate is layered bottom-up:
//!
//! - [`mobility`]: Gauss–Markov ground-device motion with reflecting walls.
//! - [`channel`]: air-to-ground LoS/NLoS path loss, SNR/SINR, Shannon rate and
//!   the LoRa demodulation-threshold table.
//! - [`power`]: multi-rotor hover power and system energy efficiency.
//! - [`association`]: per-step channel-aware ED→UAV matching under range and
//!   quota limits.
//! - [`env`]: the multi-agent game (reset/step, observations, shared reward,
//!   episode traces).
//! - [`neural`]: a small reverse-mode autodiff tape, GRU actor/critic and Adam.
//! - [`mappo`]: centralized-critic PPO training and decentralized execution.
//! - [`baselines`]: random and greedy allocators plus an exhaustive oracle.
//! - [`config`], [`rng`], [`metrics`], [`cli`]: configuration, seeded RNG
//!   streams, persisted outputs and the command-line front end.
//!
//! Runnable walkthroughs of each layer live in the crate's `examples/`
//! directory.

pub mod association;
pub mod baselines;
pub mod channel;
pub mod cli;
pub mod config;
pub mod env;
pub mod error;
pub mod mappo;
pub mod metrics;
pub mod mobility;
pub mod neural;
pub mod power;
pub mod rng;

pub use error::{Error, Result};

/// A point or vector in the horizontal plane, meters or m/s.
pub type Vec2 = [f64; 2];

pub(crate) fn norm2(v: Vec2) -> f64 {
    v[0].hypot(v[1])
}

pub(crate) fn dist2(a: Vec2, b: Vec2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}
