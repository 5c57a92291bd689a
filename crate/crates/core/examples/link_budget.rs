//! Air-to-ground link budget against horizontal distance: elevation, LoS
//! probability, path loss, SNR at each transmit power, and which SF/BW
//! pairs still clear their demodulation threshold.
//!
//! cargo run --example link_budget

use uavlora::channel::{self, ChannelParams, SnrThresholdTable};
use uavlora::env::RadioSets;

fn main() -> uavlora::Result<()> {
    let p = ChannelParams::default();
    let sets = RadioSets::default();
    let table = SnrThresholdTable::default();
    println!("FSPL at 1 km: {:.2} dB", channel::fspl_db(1000.0, p.carrier_hz, p.light_speed));
    println!();
    println!("{:>6} {:>7} {:>6} {:>8} {:>10}  SNR dB at TP {:?} dBm", "d [m]", "elev", "P_LoS", "PL [dB]", "gain", sets.tp_set_dbm);
    for d in [0.0, 50.0, 100.0, 200.0, 400.0, 600.0, 800.0, 1000.0] {
        let (elev, plos, pl) = channel::path_loss_parts(d, &p);
        let fspl = channel::fspl_db(d.hypot(p.uav_altitude_m), p.carrier_hz, p.light_speed);
        let g = channel::gain_linear(pl);
        let snrs: Vec<String> = sets
            .tp_set_dbm
            .iter()
            .map(|&tp| format!("{:6.1}", channel::linear_to_db(channel::snr_linear(tp, g, p.noise_dbm))))
            .collect();
        println!(
            "{d:>6.0} {elev:>6.2}° {plos:>6.3} {pl:>8.2} {g:>10.3e}  {}   (FSPL {fspl:.2})",
            snrs.join(" ")
        );
    }

    // a 2 dBm link at the edge of the communication range
    let g = channel::gain_at(800.0, &p);
    let snr_db = channel::linear_to_db(channel::snr_linear(2.0, g, p.noise_dbm));
    println!("\nmargins at 800 m, 2 dBm (SNR {snr_db:.1} dB):");
    for &sf in &sets.sf_set {
        let row: Vec<String> = sets
            .bw_set_khz
            .iter()
            .map(|&bw| {
                let thr = table.threshold_db(sf, bw).expect("table covers the default sets");
                let rate = channel::rate_bps(f64::from(bw) * 1e3, channel::snr_linear(2.0, g, p.noise_dbm));
                format!("{bw} kHz {:+6.1} dB {:7.2} Mbit/s", snr_db - thr, rate / 1e6)
            })
            .collect();
        println!("  SF{sf:<2} {}", row.join(" | "));
    }
    Ok(())
}
