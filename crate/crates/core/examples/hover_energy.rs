//! Hover power of the default multi-rotor and how the per-step energy
//! efficiency of one UAV responds to uplink rate and transmit power.
//!
//! cargo run --example hover_energy

use uavlora::channel;
use uavlora::power::{self, EnergyBreakdown, HoverParams};

fn main() -> uavlora::Result<()> {
    let base = HoverParams::default();
    let hover = power::hover_power_w(&base)?;
    println!("hover power: {hover:.3} W");
    for w in [10.0, 20.0, 40.0] {
        let p = power::hover_power_w(&HoverParams { rotor_weight_n: w, ..base.clone() })?;
        println!("  rotor weight {w:>4} N -> {p:8.2} W");
    }

    println!("\nEE of one UAV serving five EDs:");
    for tp in [2.0, 8.0, 14.0] {
        for rate in [1e5, 1e6, 5e6] {
            let uplink = 5.0 * channel::dbm_to_watts(tp);
            let e = EnergyBreakdown::new(vec![rate], vec![uplink], hover);
            println!(
                "  TP {tp:>4} dBm  sum rate {:>5.1} Mbit/s  uplink {:.4} W  EE {:>9.1} bit/J",
                rate / 1e6,
                uplink,
                e.ee_bits_per_joule
            );
        }
    }
    println!("\nhover dominates the denominator, so EE tracks the sum rate almost linearly");
    Ok(())
}
