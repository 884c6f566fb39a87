//! Semi-orthogonal group selection over a range of thresholds.
//!
//! Run with `cargo run --example gss_schedule`.

use groupcast::model::{channels_for, drop_for};
use groupcast::{all_group_directions, mgms_gss, PsaSettings, Result, SystemConfig};

fn main() -> Result<()> {
    let config = SystemConfig::uniform(8, 10, 2, 3);
    let drop = drop_for(&config, 0)?;
    let channels = channels_for(&config, &drop, 0, 0)?;
    let directions = all_group_directions(&channels, &config, &PsaSettings::default())?;

    for alpha in [0.1, 0.2, 0.4, 0.6] {
        let out = mgms_gss(&directions, &channels, alpha, config.power_budget, config.noise_variance)?;
        println!("alpha {alpha}: {} slots {:?}", out.schedule.num_slots(), out.schedule.slots);
        let violations: usize = out
            .slots
            .iter()
            .map(|s| s.semi_orthogonality_violations(&directions, alpha))
            .sum();
        assert_eq!(violations, 0);
    }

    let out = mgms_gss(&directions, &channels, 0.2, config.power_budget, config.noise_variance)?;
    println!("selection trace of the first slot at alpha 0.2:");
    for step in &out.slots[0].steps {
        println!(
            "  pick group {} from {} candidates, slot min SINR {:.3}",
            step.group, step.candidates, step.min_sinr
        );
    }
    Ok(())
}
