//! Mean-shift clustering of group directions and the cross-cluster schedule.
//!
//! Run with `cargo run --example gsc_clustering`.

use groupcast::model::{channels_for, drop_for, substream, StreamPurpose};
use groupcast::{
    all_group_directions, build_feature_space, mean_shift_cluster, mgms_gsc, GscSettings,
    PsaSettings, Result, SystemConfig,
};

fn main() -> Result<()> {
    let config = SystemConfig::uniform(4, 8, 2, 5);
    let drop = drop_for(&config, 0)?;
    let channels = channels_for(&config, &drop, 0, 0)?;
    let directions = all_group_directions(&channels, &config, &PsaSettings::default())?;
    let space = build_feature_space(&directions)?;

    for tau in [0.5, 0.9, 1.2, 1.5, 2.1] {
        let clustering = mean_shift_cluster(&space, tau, &GscSettings::default())?;
        let mut rng = substream(config.rng_seed, StreamPurpose::Scheduler, &[0]);
        let schedule =
            mgms_gsc(&clustering, &channels, config.power_budget, config.noise_variance, &mut rng)?;
        let members: Vec<&Vec<usize>> = clustering.clusters.iter().map(|c| &c.members).collect();
        println!(
            "tau {tau}: {} clusters {members:?} -> {} slots {:?}",
            clustering.num_clusters(),
            schedule.num_slots(),
            schedule.slots
        );
    }

    let clustering = mean_shift_cluster(&space, 1.2, &GscSettings::default())?;
    let first = &clustering.clusters[0];
    println!(
        "first cluster at tau 1.2: {} updates, shifts {:?}",
        first.iterations, first.shifts
    );
    Ok(())
}
