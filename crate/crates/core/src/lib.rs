//! Joint group scheduling and max-min fair multicast beamforming.
//!
//! A base station with `N` antennas serves `G` multicast groups. Groups are
//! partitioned into time slots and, within each slot, served by
//! multi-group multicast beamformers that maximize the worst user's SINR.
//! The pipeline runs in three phases:
//!
//! 1. [`direction`]: a spatial signature (group-channel direction) per group.
//! 2. [`gss`] or [`gsc`]: a schedule built from those signatures, either by
//!    semi-orthogonal selection or by mean-shift clustering.
//! 3. [`beamforming`]: per-slot max-min fair beamformers.
//!
//! [`harness`] wraps the pipeline into reproducible Monte-Carlo sweeps.

pub mod beamforming;
pub mod direction;
pub mod error;
pub mod gsc;
pub mod gss;
pub mod harness;
pub mod model;
pub mod numerics;
pub mod psa;
pub mod schedule;
mod serde_complex;

pub use beamforming::{asymptotic_beamformers, evaluate_sinr, min_throughput, psa_mmf_slot, SlotBeamformers};
pub use direction::{all_group_directions, approx_cov_single, psa_single_group, GroupDirection};
pub use error::{Error, Result};
pub use gsc::{build_feature_space, mean_shift_cluster, mgms_gsc, Clustering, FeatureSpace, GscSettings};
pub use gss::{gss_select_slot, mgms_gss, semiorth_metric, GssOutcome};
pub use harness::{run_pipeline, sweep, ExperimentConfig, ExperimentResult, SchedulerKind};
pub use model::{
    calibrate_pathloss_constant, generate_channels, generate_drop, pathloss_variance, ChannelSet,
    GroupChannels, SystemConfig, UserDrop, C64, CMatrix, CVector,
};
pub use psa::PsaSettings;
pub use schedule::Schedule;
