//! One full episode with the greedy controller, printing the reward
//! decomposition every 25 steps and the episode totals.
//!
//! cargo run --example episode_rollout -- [seed]

use uavlora::baselines::GreedyController;
use uavlora::config::ScenarioConfig;
use uavlora::env::Env;
use uavlora::mappo::Controller;

fn main() -> uavlora::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let cfg = ScenarioConfig::default();
    let mut env = Env::new(cfg, seed)?;
    let mut ctrl = GreedyController::for_env(&env);
    let mut obs = env.reset(seed);
    ctrl.reset(env.num_agents());
    let mut total = 0.0;
    loop {
        let joint = obs.iter().enumerate().map(|(u, o)| ctrl.act(u, o)).collect::<uavlora::Result<Vec<_>>>()?;
        let out = env.step(&joint)?;
        total += out.reward;
        let t = out.info.t;
        if t % 25 == 0 || out.done {
            let e = &out.info.eval;
            println!(
                "t={t:>3}  served {:>2}  EE {:>8.1}  Xi {:.2}  margin {:>5.1} dB  P_tx {:.4} W  reward {:.4} = {:.3} + {:.3} + {:.3} - {:.4}",
                out.info.assignment.iter().flatten().count(),
                e.energy.ee_bits_per_joule,
                e.success_rate,
                e.mean_margin_db,
                e.p_total_w,
                out.reward,
                e.terms.ee,
                e.terms.success,
                e.terms.margin,
                e.terms.power
            );
        }
        obs = out.observations;
        if out.done {
            break;
        }
    }
    println!("episode reward {total:.3}, accumulated EE {:.1} bit/J", env.episode_ee());
    Ok(())
}
