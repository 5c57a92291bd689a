//! Trains MAPPO on the default 2-UAV, 10-ED scenario and compares the
//! learned policy with the random and greedy baselines.
//!
//! cargo run --release --example train_mappo -- [env_steps] [seed]

use std::time::Instant;

use uavlora::baselines::{GreedyController, RandomController};
use uavlora::config::ScenarioConfig;
use uavlora::env::Env;
use uavlora::mappo::{evaluate, DecentralizedController, Trainer};
use uavlora::rng::{stream_rng, Stream};

fn main() -> uavlora::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let mut cfg = ScenarioConfig::default();
    cfg.train.total_env_steps = steps;
    let mut trainer = Trainer::new(cfg.clone(), seed)?;
    let planned = trainer.planned_updates();
    let start = Instant::now();
    let rows = trainer.train(|_, row| {
        if (row.update_index + 1) % (planned / 10).max(1) == 0 {
            println!(
                "update {:>5}  steps {:>7}  reward {:>8.4}  EE {:>9.1}  entropy {:.3}  {:.0}s",
                row.update_index + 1,
                row.env_steps,
                row.mean_reward,
                row.mean_step_ee,
                row.entropy,
                start.elapsed().as_secs_f64()
            );
        }
        Ok(())
    })?;
    println!("{} updates in {:.1}s", rows.len(), start.elapsed().as_secs_f64());
    let k = (rows.len() / 10).max(1);
    let decile = |r: &[uavlora::metrics::MetricsRow]| r.iter().map(|m| m.mean_reward).sum::<f64>() / r.len() as f64;
    if !rows.is_empty() {
        println!(
            "mean reward: first decile {:.3}, final decile {:.3}",
            decile(&rows[..k]),
            decile(&rows[rows.len() - k..])
        );
    }

    let eval_seeds: Vec<u64> = (0..5).map(|i| 10_000 + i).collect();
    let env = Env::new(cfg.clone(), seed)?;
    let mut mappo = DecentralizedController::new(trainer.actors().clone());
    let mut greedy = GreedyController::for_env(&env);
    let mut random = RandomController::new(cfg.radio.clone(), stream_rng(seed, Stream::Baseline));
    for ctrl in [
        &mut mappo as &mut dyn uavlora::mappo::Controller,
        &mut greedy,
        &mut random,
    ] {
        let r = evaluate(&cfg, ctrl, &eval_seeds)?;
        println!(
            "{:>7}: step EE {:>9.1} bit/J  success {:.3}  reward {:.4}",
            r.policy, r.mean_step_ee, r.success_rate, r.mean_reward
        );
    }
    Ok(())
}
