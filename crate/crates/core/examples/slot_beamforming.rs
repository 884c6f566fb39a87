//! Max-min fair beamformers for one slot, against the asymptotic start point.
//!
//! Run with `cargo run --example slot_beamforming`.

use groupcast::beamforming::rate_from_sinr;
use groupcast::model::{channels_for, drop_for};
use groupcast::psa::write_trace_csv;
use groupcast::{
    asymptotic_beamformers, evaluate_sinr, psa_mmf_slot, PsaSettings, Result, SystemConfig,
};

fn main() -> Result<()> {
    let config = SystemConfig::uniform(8, 4, 3, 9);
    let drop = drop_for(&config, 0)?;
    let channels = channels_for(&config, &drop, 0, 0)?;
    let groups = [0, 1, 2, 3];
    let (p, noise) = (config.power_budget, config.noise_variance);

    let start = asymptotic_beamformers(&channels, &groups, p, noise)?;
    let start_sinr = evaluate_sinr(&groups, &start, &channels, noise)?;
    let start_min = start_sinr.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    println!("asymptotic beamformers: min SINR {start_min:.4}");

    let slot = psa_mmf_slot(0, &channels, &groups, p, noise, &PsaSettings::default())?;
    println!(
        "PSA beamformers: min SINR {:.4}, min rate {:.4} bits/s/Hz, power {:.4}",
        slot.min_sinr(),
        slot.min_rate,
        slot.total_power()
    );
    assert!((rate_from_sinr(slot.min_sinr()) - slot.min_rate).abs() < 1e-9);
    for (g, sinr) in slot.groups.iter().zip(&slot.sinr) {
        println!("  group {g}: user SINRs {sinr:.3?}");
    }

    let path = std::env::temp_dir().join("groupcast_slot_trace.csv");
    write_trace_csv(&slot.trace, &path)?;
    println!("PSA trace ({} iterations) written to {}", slot.trace.len(), path.display());
    Ok(())
}
