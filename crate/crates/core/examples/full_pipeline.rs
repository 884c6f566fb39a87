//! All three phases on one channel instance, for every scheduler.
//!
//! Run with `cargo run --example full_pipeline`.

use groupcast::harness::PipelineOptions;
use groupcast::model::{channels_for, drop_for, substream, StreamPurpose};
use groupcast::{run_pipeline, Result, SchedulerKind, SystemConfig};

fn main() -> Result<()> {
    let config = SystemConfig::uniform(8, 10, 2, 2024);
    let drop = drop_for(&config, 0)?;
    let channels = channels_for(&config, &drop, 0, 0)?;
    let options = PipelineOptions::default();

    for (kind, threshold) in [
        (SchedulerKind::Gss, 0.3),
        (SchedulerKind::Gsc, 1.2),
        (SchedulerKind::SingleSlot, 0.0),
        (SchedulerKind::GSlots, 0.0),
    ] {
        let mut rng = substream(config.rng_seed, StreamPurpose::Scheduler, &[0]);
        let out = run_pipeline(&channels, &config, kind, threshold, &options, &mut rng)?;
        let rates: Vec<String> = out.slots.iter().map(|s| format!("{:.3}", s.min_rate)).collect();
        println!(
            "{kind:<11} T={:<2} slot min rates [{}] min throughput {:.4}",
            out.schedule.num_slots(),
            rates.join(", "),
            out.min_throughput
        );
    }
    Ok(())
}
