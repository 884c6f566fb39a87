//! Group-channel directions for every group of one channel instance.
//!
//! Run with `cargo run --example group_directions`.

use groupcast::model::{channels_for, drop_for};
use groupcast::numerics::abs_cosine;
use groupcast::{all_group_directions, PsaSettings, Result, SystemConfig};

fn main() -> Result<()> {
    let config = SystemConfig::uniform(8, 5, 3, 11);
    let drop = drop_for(&config, 0)?;
    let channels = channels_for(&config, &drop, 0, 0)?;
    let directions = all_group_directions(&channels, &config, &PsaSettings::default())?;

    for d in &directions {
        println!(
            "group {}: min gain {:.4}, PSA iterations {}",
            d.group,
            d.min_gain,
            d.trace.len()
        );
    }
    println!("pairwise |cos| between directions:");
    for a in &directions {
        let row: Vec<String> = directions
            .iter()
            .map(|b| format!("{:.2}", abs_cosine(&a.direction, &b.direction)))
            .collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}
