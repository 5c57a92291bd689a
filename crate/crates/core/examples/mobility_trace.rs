//! Walks a few EDs under the Gauss–Markov model and prints where they end
//! up, plus time spent near the walls and speed statistics over a long run.
//!
//! cargo run --example mobility_trace -- [steps] [seed]

use uavlora::mobility::{self, MobilityParams};
use uavlora::rng::{stream_rng, Stream};

fn main() {
    let mut args = std::env::args().skip(1);
    let steps: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let params = MobilityParams::default();
    let mut placement = stream_rng(seed, Stream::Placement);
    let mut noise = stream_rng(seed, Stream::Mobility);
    for ed in 0..4 {
        let mut kin = mobility::spawn(&params, &mut placement);
        let start = kin.position;
        let (mut speed_sum, mut max_speed, mut bounces) = (0.0, 0.0f64, 0);
        for _ in 0..steps {
            let next = mobility::advance(&kin, &params, &mut noise);
            let edge = |p: f64| p < 1.0 || p > params.area_side - 1.0;
            if edge(next.position[0]) || edge(next.position[1]) {
                bounces += 1;
            }
            let s = next.velocity[0].hypot(next.velocity[1]);
            speed_sum += s;
            max_speed = max_speed.max(s);
            kin = next;
        }
        println!(
            "ED {ed}: ({:7.2}, {:7.2}) -> ({:7.2}, {:7.2})  mean speed {:.3} m/s  max {:.3}  near-wall steps {bounces}",
            start[0],
            start[1],
            kin.position[0],
            kin.position[1],
            speed_sum / steps as f64,
            max_speed
        );
    }
    println!("speed cap {} m/s, {} s per step", params.v_max, params.dt);
}
