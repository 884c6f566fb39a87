use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::emit::round_sig;
use super::pipeline::{compute_directions, schedule_groups};
use super::stats::empirical_cdf;
use super::{ExperimentConfig, SchedulerKind};
use crate::beamforming::psa_mmf_slot;
use crate::error::{Error, Result};
use crate::model::{channels_for, drop_for, substream, ChannelSet, StreamPurpose, SystemConfig};

/// Outcome of one pipeline run in a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub num_antennas: usize,
    pub threshold_index: usize,
    pub threshold: f64,
    pub drop: usize,
    pub realization: usize,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub num_slots: usize,
    pub slot_sizes: Vec<usize>,
    pub min_throughput: Option<f64>,
    pub sched_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_clusters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_cluster_iterations: Option<usize>,
}

/// Aggregate over all runs of one `(N, threshold)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub scheduler: SchedulerKind,
    pub num_antennas: usize,
    pub threshold: f64,
    pub mean_t: Option<f64>,
    pub mean_min_throughput: Option<f64>,
    pub mean_sched_time_s: Option<f64>,
    pub runs_ok: usize,
    pub runs_failed: usize,
    /// Empirical CDF of the number of groups per slot.
    pub cdf: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub cells: Vec<CellSummary>,
    pub records: Vec<RunRecord>,
}

impl ExperimentResult {
    pub fn cell(&self, num_antennas: usize, threshold_index: usize) -> Option<&CellSummary> {
        let per_n = self.config.thresholds.len();
        let n_index = self.config.antenna_grid.iter().position(|&n| n == num_antennas)?;
        self.cells.get(n_index * per_n + threshold_index)
    }

    /// Copy with every wall-clock measurement zeroed.
    pub fn without_timings(&self) -> Self {
        let mut out = self.clone();
        for c in &mut out.cells {
            c.mean_sched_time_s = c.mean_sched_time_s.map(|_| 0.0);
        }
        for r in &mut out.records {
            r.sched_time_s = 0.0;
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

fn failed_record(
    n: usize,
    threshold_index: usize,
    threshold: f64,
    drop: usize,
    realization: usize,
    error: &Error,
) -> RunRecord {
    RunRecord {
        num_antennas: n,
        threshold_index,
        threshold,
        drop,
        realization,
        ok: false,
        error: Some(error.to_string()),
        num_slots: 0,
        slot_sizes: vec![],
        min_throughput: None,
        sched_time_s: 0.0,
        num_clusters: None,
        first_cluster_iterations: None,
    }
}

/// All threshold runs on one channel instance. Directions are shared across
/// thresholds and per-slot beamforming is solved once per distinct slot.
fn run_instance(
    config: &ExperimentConfig,
    system: &SystemConfig,
    drop: usize,
    realization: usize,
) -> Vec<RunRecord> {
    let n = system.num_antennas;
    let fail_all = |e: &Error| {
        log::warn!("N={n} drop={drop} realization={realization}: {e}");
        config
            .thresholds
            .iter()
            .enumerate()
            .map(|(ti, &t)| failed_record(n, ti, t, drop, realization, e))
            .collect()
    };
    let channels: ChannelSet = match drop_for(system, drop as u64)
        .and_then(|d| channels_for(system, &d, drop as u64, realization as u64))
    {
        Ok(c) => c,
        Err(e) => return fail_all(&e),
    };
    let directions = if config.scheduler.needs_directions() {
        match compute_directions(&channels, system, &config.psa) {
            Ok(d) => Some(d),
            Err(e) => return fail_all(&e),
        }
    } else {
        None
    };

    let mut slot_rates: HashMap<Vec<usize>, f64> = HashMap::new();
    config
        .thresholds
        .iter()
        .enumerate()
        .map(|(ti, &threshold)| {
            let mut rng = substream(
                system.rng_seed,
                StreamPurpose::Scheduler,
                &[n as u64, ti as u64, drop as u64, realization as u64],
            );
            let mut run = || -> Result<RunRecord> {
                let outcome = schedule_groups(
                    config.scheduler,
                    threshold,
                    directions.as_deref(),
                    &channels,
                    system,
                    &config.gsc,
                    &mut rng,
                )
                .map_err(|e| e.in_phase("phase 2 (scheduling)"))?;
                let schedule = &outcome.schedule;
                let throughput = if config.evaluate_beamformers {
                    let mut worst = f64::INFINITY;
                    for (t, slot) in schedule.slots.iter().enumerate() {
                        let rate = match slot_rates.get(slot) {
                            Some(&r) => r,
                            None => {
                                let r = psa_mmf_slot(
                                    t,
                                    &channels,
                                    slot,
                                    system.power_budget,
                                    system.noise_variance,
                                    &config.psa,
                                )
                                .map_err(|e| e.in_phase("phase 3 (beamforming)"))?
                                .min_rate;
                                slot_rates.insert(slot.clone(), r);
                                r
                            }
                        };
                        worst = worst.min(rate);
                    }
                    Some(round_sig(worst / schedule.num_slots() as f64, 9))
                } else {
                    None
                };
                Ok(RunRecord {
                    num_antennas: n,
                    threshold_index: ti,
                    threshold,
                    drop,
                    realization,
                    ok: true,
                    error: None,
                    num_slots: schedule.num_slots(),
                    slot_sizes: schedule.slot_sizes(),
                    min_throughput: throughput,
                    sched_time_s: round_sig(outcome.elapsed.as_secs_f64(), 9),
                    num_clusters: outcome.clustering.as_ref().map(|c| c.num_clusters()),
                    first_cluster_iterations: outcome
                        .clustering
                        .as_ref()
                        .and_then(|c| c.clusters.first())
                        .map(|c| c.iterations),
                })
            };
            run().unwrap_or_else(|e| {
                log::warn!("N={n} threshold={threshold} drop={drop} realization={realization}: {e}");
                failed_record(n, ti, threshold, drop, realization, &e)
            })
        })
        .collect()
}

fn summarize(
    scheduler: SchedulerKind,
    n: usize,
    threshold: f64,
    records: &[&RunRecord],
) -> CellSummary {
    let ok: Vec<&RunRecord> = records.iter().copied().filter(|r| r.ok).collect();
    let sizes: Vec<usize> = ok.iter().flat_map(|r| r.slot_sizes.iter().copied()).collect();
    let cdf = empirical_cdf(&sizes)
        .map(|c| c.into_iter().map(|(v, p)| (v, round_sig(p, 9))).collect())
        .unwrap_or_default();
    let throughputs: Vec<f64> = ok.iter().filter_map(|r| r.min_throughput).collect();
    CellSummary {
        scheduler,
        num_antennas: n,
        threshold,
        mean_t: mean(ok.iter().map(|r| r.num_slots as f64)).map(|v| round_sig(v, 9)),
        mean_min_throughput: if throughputs.len() == ok.len() {
            mean(throughputs.into_iter()).map(|v| round_sig(v, 9))
        } else {
            None
        },
        mean_sched_time_s: mean(ok.iter().map(|r| r.sched_time_s)).map(|v| round_sig(v, 9)),
        runs_ok: ok.len(),
        runs_failed: records.len() - ok.len(),
        cdf,
    }
}

/// Runs the full Monte-Carlo sweep.
pub fn sweep(config: &ExperimentConfig) -> Result<ExperimentResult> {
    sweep_with(config, |_| {})
}

/// Like [`sweep`], calling `on_cell` as each cell's summary becomes available.
pub fn sweep_with(
    config: &ExperimentConfig,
    mut on_cell: impl FnMut(&CellSummary),
) -> Result<ExperimentResult> {
    config.validate()?;
    let mut cells = Vec::new();
    let mut records = Vec::new();
    for &n in &config.antenna_grid {
        let system = SystemConfig {
            num_antennas: n,
            ..config.system.clone()
        };
        let instances: Vec<(usize, usize)> = (0..config.num_drops)
            .flat_map(|d| (0..config.num_realizations).map(move |r| (d, r)))
            .collect();
        let mut batch: Vec<RunRecord> = instances
            .par_iter()
            .flat_map_iter(|&(d, r)| run_instance(config, &system, d, r))
            .collect();
        batch.sort_by_key(|r| (r.threshold_index, r.drop, r.realization));
        for (ti, &threshold) in config.thresholds.iter().enumerate() {
            let cell_records: Vec<&RunRecord> =
                batch.iter().filter(|r| r.threshold_index == ti).collect();
            let summary = summarize(config.scheduler, n, threshold, &cell_records);
            on_cell(&summary);
            cells.push(summary);
        }
        records.extend(batch);
    }
    Ok(ExperimentResult {
        config: config.clone(),
        cells,
        records,
    })
}
