//! Places EDs, runs the channel-aware matching and writes the snapshot to
//! `association.csv` in the working directory (or the path given).
//!
//! cargo run --example association_snapshot -- [num_eds] [num_uavs] [out.csv]

use std::path::PathBuf;

use uavlora::association;
use uavlora::config::ScenarioConfig;
use uavlora::env::Env;

fn main() -> uavlora::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut cfg = ScenarioConfig::default();
    cfg.world.num_eds = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    cfg.world.num_uavs = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);
    let out = args.next().map_or_else(|| PathBuf::from("association.csv"), PathBuf::from);

    let env = Env::new(cfg.clone(), 7)?;
    let s = env.state();
    let rows = association::snapshot(&s.association, &s.ed_positions(), &s.uav_xy(), &s.gains);
    association::write_snapshot_csv(&out, &rows)?;

    println!("quota {} per UAV, range {} m", env.quota(), cfg.world.comm_range_m);
    for u in 0..cfg.world.num_uavs {
        println!("UAV {u} at {:?}: EDs {:?}", s.uavs[u].xy, s.association.served_by(u));
    }
    let unserved: Vec<usize> = (0..cfg.world.num_eds).filter(|&v| s.association.assignment[v].is_none()).collect();
    println!("unserved: {unserved:?}");
    println!("wrote {}", out.display());
    Ok(())
}
