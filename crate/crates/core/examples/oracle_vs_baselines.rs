//! Exhaustive per-step EE maximum on a tiny instance next to what the
//! greedy and random allocators achieve on the same snapshot.
//!
//! cargo run --release --example oracle_vs_baselines -- [num_eds] [seed]

use uavlora::baselines::{self, default_restricted_sets};
use uavlora::config::ScenarioConfig;
use uavlora::env::{Env, RadioAssignment};
use uavlora::rng::{stream_rng, Stream};

fn main() -> uavlora::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut cfg = ScenarioConfig::default();
    cfg.world.num_eds = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);
    cfg.world.num_uavs = 1;
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let sets = default_restricted_sets();
    cfg.radio = sets.clone();

    let env = Env::new(cfg.clone(), seed)?;
    let oracle = baselines::exhaustive_oracle(&env, &sets)?;
    let s = env.state();
    let greedy: Vec<Option<RadioAssignment>> = s
        .association
        .assignment
        .iter()
        .enumerate()
        .map(|(v, a)| a.map(|u| baselines::greedy_assignment(s.gains[v][u], &sets, env.thresholds(), cfg.channel.noise_dbm)))
        .collect();
    let mut rng = stream_rng(seed, Stream::Baseline);
    let mut random_best = 0.0f64;
    let mut random_mean = 0.0;
    let draws = 200;
    for _ in 0..draws {
        let alloc: Vec<Option<RadioAssignment>> = s
            .association
            .assignment
            .iter()
            .map(|a| a.map(|_| sets.decode(rand::Rng::random_range(&mut rng, 0..sets.combos()))))
            .collect();
        let ee = baselines::allocation_ee(&env, &sets, &alloc);
        random_best = random_best.max(ee);
        random_mean += ee / f64::from(draws);
    }

    let show = |a: &[Option<RadioAssignment>]| -> Vec<String> {
        a.iter()
            .map(|x| x.map_or("-".into(), |r| format!("SF{}/{}dBm/{}kHz", sets.sf(r), sets.tp_dbm(r), sets.bw_khz(r))))
            .collect()
    };
    println!("oracle ({} evaluations): {:.1} bit/J  {:?}", oracle.evaluations, oracle.ee_bits_per_joule, show(&oracle.allocation));
    println!("greedy: {:.1} bit/J  {:?}", baselines::allocation_ee(&env, &sets, &greedy), show(&greedy));
    println!("random: mean {random_mean:.1} bit/J, best of {draws} {random_best:.1} bit/J");
    Ok(())
}
