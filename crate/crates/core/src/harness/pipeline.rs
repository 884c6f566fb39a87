use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SchedulerKind;
use crate::beamforming::{min_throughput, psa_mmf_slot, SlotBeamformers};
use crate::direction::{all_group_directions, GroupDirection};
use crate::error::{Error, Result};
use crate::gsc::{build_feature_space, mean_shift_cluster, mgms_gsc, Clustering, GscSettings};
use crate::gss::{mgms_gss, GssOutcome};
use crate::model::{ChannelSet, SystemConfig};
use crate::psa::PsaSettings;
use crate::schedule::Schedule;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    #[serde(default)]
    pub psa: PsaSettings,
    #[serde(default)]
    pub gsc: GscSettings,
}

#[derive(Debug, Clone)]
pub struct ScheduleOutcome {
    pub schedule: Schedule,
    pub gss: Option<GssOutcome>,
    pub clustering: Option<Clustering>,
    /// Wall time of the scheduling phase alone.
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineOutput {
    pub scheduler: SchedulerKind,
    pub threshold: f64,
    pub schedule: Schedule,
    pub slots: Vec<SlotBeamformers>,
    pub min_throughput: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directions: Option<Vec<GroupDirection>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clustering: Option<Clustering>,
    pub sched_time_s: f64,
}

/// Phase 1: one group-channel direction per group.
pub fn compute_directions(
    channels: &ChannelSet,
    config: &SystemConfig,
    psa: &PsaSettings,
) -> Result<Vec<GroupDirection>> {
    all_group_directions(channels, config, psa).map_err(|e| e.in_phase("phase 1 (directions)"))
}

/// Phase 2. `directions` is required for `gss` and `gsc` and ignored by the
/// baselines.
pub fn schedule_groups<R: Rng + ?Sized>(
    kind: SchedulerKind,
    threshold: f64,
    directions: Option<&[GroupDirection]>,
    channels: &ChannelSet,
    config: &SystemConfig,
    gsc: &GscSettings,
    rng: &mut R,
) -> Result<ScheduleOutcome> {
    let g = channels.num_groups();
    let (p, noise) = (config.power_budget, config.noise_variance);
    let need = || {
        directions.ok_or_else(|| {
            Error::Contract(format!("scheduler {kind} needs group-channel directions"))
        })
    };
    let started = Instant::now();
    let outcome = match kind {
        SchedulerKind::SingleSlot => ScheduleOutcome {
            schedule: Schedule::single_slot(g),
            gss: None,
            clustering: None,
            elapsed: Duration::ZERO,
        },
        SchedulerKind::GSlots => ScheduleOutcome {
            schedule: Schedule::one_per_slot(g),
            gss: None,
            clustering: None,
            elapsed: Duration::ZERO,
        },
        SchedulerKind::Gss => {
            let out = mgms_gss(need()?, channels, threshold, p, noise)?;
            ScheduleOutcome {
                schedule: out.schedule.clone(),
                gss: Some(out),
                clustering: None,
                elapsed: Duration::ZERO,
            }
        }
        SchedulerKind::Gsc => {
            let space = build_feature_space(need()?)?;
            let clustering = mean_shift_cluster(&space, threshold, gsc)?;
            let schedule = mgms_gsc(&clustering, channels, p, noise, rng)?;
            ScheduleOutcome {
                schedule,
                gss: None,
                clustering: Some(clustering),
                elapsed: Duration::ZERO,
            }
        }
    };
    let elapsed = started.elapsed();
    outcome.schedule.validate(g)?;
    Ok(ScheduleOutcome { elapsed, ..outcome })
}

/// Phase 3: max-min fair beamformers for every slot.
pub fn solve_slots(
    schedule: &Schedule,
    channels: &ChannelSet,
    config: &SystemConfig,
    psa: &PsaSettings,
) -> Result<Vec<SlotBeamformers>> {
    schedule
        .slots
        .par_iter()
        .enumerate()
        .map(|(t, groups)| {
            psa_mmf_slot(
                t,
                channels,
                groups,
                config.power_budget,
                config.noise_variance,
                psa,
            )
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_phase("phase 3 (beamforming)"))
}

/// Directions, scheduling and per-slot beamforming for one channel instance.
pub fn run_pipeline<R: Rng + ?Sized>(
    channels: &ChannelSet,
    config: &SystemConfig,
    kind: SchedulerKind,
    threshold: f64,
    options: &PipelineOptions,
    rng: &mut R,
) -> Result<PipelineOutput> {
    config.validate()?;
    if channels.num_groups() != config.num_groups {
        return Err(Error::Contract(format!(
            "channel set has {} groups, configuration {}",
            channels.num_groups(),
            config.num_groups
        )));
    }
    let directions = if kind.needs_directions() {
        Some(compute_directions(channels, config, &options.psa)?)
    } else {
        None
    };
    let scheduled = schedule_groups(
        kind,
        threshold,
        directions.as_deref(),
        channels,
        config,
        &options.gsc,
        rng,
    )
    .map_err(|e| e.in_phase("phase 2 (scheduling)"))?;
    let slots = solve_slots(&scheduled.schedule, channels, config, &options.psa)?;
    let throughput = min_throughput(&slots)?;
    Ok(PipelineOutput {
        scheduler: kind,
        threshold,
        schedule: scheduled.schedule,
        slots,
        min_throughput: throughput,
        directions,
        clustering: scheduled.clustering,
        sched_time_s: scheduled.elapsed.as_secs_f64(),
    })
}
