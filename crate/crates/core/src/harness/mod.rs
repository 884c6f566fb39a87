//! Experiment orchestration: the three-phase pipeline, baselines,
//! Monte-Carlo sweeps and result files.

mod emit;
mod pipeline;
pub mod stats;
mod sweep;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gsc::GscSettings;
use crate::model::SystemConfig;
use crate::psa::PsaSettings;

pub use emit::{emit, format_sig, round_sig};
pub use pipeline::{
    compute_directions, run_pipeline, schedule_groups, solve_slots, PipelineOptions,
    PipelineOutput, ScheduleOutcome,
};
pub use stats::{best_threshold_summary, empirical_cdf, spearman, BestThresholdRow};
pub use sweep::{sweep, sweep_with, CellSummary, ExperimentResult, RunRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerKind {
    Gss,
    Gsc,
    SingleSlot,
    GSlots,
}

impl SchedulerKind {
    /// Whether the scheduler uses group-channel directions.
    pub fn needs_directions(self) -> bool {
        matches!(self, SchedulerKind::Gss | SchedulerKind::Gsc)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SchedulerKind::Gss => "gss",
            SchedulerKind::Gsc => "gsc",
            SchedulerKind::SingleSlot => "single-slot",
            SchedulerKind::GSlots => "g-slots",
        }
    }

    /// Config error unless `value` is a valid threshold for this scheduler.
    pub fn check_threshold(self, value: f64) -> Result<()> {
        let ok = match self {
            SchedulerKind::Gss => value > 0.0 && value <= 1.0,
            SchedulerKind::Gsc => value > 0.0 && value.is_finite(),
            SchedulerKind::SingleSlot | SchedulerKind::GSlots => value.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "threshold {value} is out of range for scheduler {self}"
            )))
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchedulerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gss" => Ok(SchedulerKind::Gss),
            "gsc" => Ok(SchedulerKind::Gsc),
            "single-slot" => Ok(SchedulerKind::SingleSlot),
            "g-slots" => Ok(SchedulerKind::GSlots),
            other => Err(Error::Config(format!(
                "unknown scheduler {other:?} (expected gss, gsc, single-slot or g-slots)"
            ))),
        }
    }
}

fn default_drops() -> usize {
    20
}
fn default_realizations() -> usize {
    20
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub scheduler: SchedulerKind,
    /// α values for `gss`, τ values for `gsc`; baselines run once per entry.
    pub thresholds: Vec<f64>,
    /// Antenna counts; each overrides `system.num_antennas`.
    pub antenna_grid: Vec<usize>,
    #[serde(default = "default_drops")]
    pub num_drops: usize,
    #[serde(default = "default_realizations")]
    pub num_realizations: usize,
    #[serde(default)]
    pub psa: PsaSettings,
    #[serde(default)]
    pub gsc: GscSettings,
    /// Run per-slot beamforming and report throughput. Schedule-only sweeps
    /// turn this off.
    #[serde(default = "default_true")]
    pub evaluate_beamformers: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(system: SystemConfig, scheduler: SchedulerKind, thresholds: Vec<f64>) -> Self {
        let n = system.num_antennas;
        ExperimentConfig {
            system,
            scheduler,
            thresholds,
            antenna_grid: vec![n],
            num_drops: default_drops(),
            num_realizations: default_realizations(),
            psa: PsaSettings::default(),
            gsc: GscSettings::default(),
            evaluate_beamformers: true,
            output_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if self.thresholds.is_empty() {
            return Err(Error::Config("threshold grid is empty".into()));
        }
        if self.antenna_grid.is_empty() {
            return Err(Error::Config("antenna grid is empty".into()));
        }
        if self.antenna_grid.contains(&0) {
            return Err(Error::Config("antenna counts must be at least 1".into()));
        }
        if self.num_drops == 0 || self.num_realizations == 0 {
            return Err(Error::Config("num_drops and num_realizations must be at least 1".into()));
        }
        for &t in &self.thresholds {
            self.scheduler.check_threshold(t)?;
        }
        self.psa
            .validate()
            .map_err(|e| Error::Config(format!("psa: {e}")))?;
        if !(self.gsc.tolerance > 0.0) || self.gsc.max_iterations == 0 {
            return Err(Error::Config("gsc tolerance must be > 0 and max_iterations >= 1".into()));
        }
        Ok(())
    }

    pub fn runs_per_cell(&self) -> usize {
        self.num_drops * self.num_realizations
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}
