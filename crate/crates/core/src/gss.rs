//! Scheduling by group spatial separation.
//!
//! Each slot is filled greedily: among the candidates, the group that keeps
//! the slot's worst-user SINR highest (under the closed-form asymptotic
//! beamformers) is added; then the candidates that are not semi-orthogonal
//! to the new Gram-Schmidt direction are dropped. Slots are formed until all
//! groups are scheduled.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamforming::{asymptotic_beamformers, evaluate_sinr};
use crate::direction::GroupDirection;
use crate::error::{Error, Result};
use crate::model::{CVector, ChannelSet};
use crate::numerics::{inner, OrthonormalBasis};
use crate::schedule::Schedule;

/// `|ĥᴴ f| / ‖ĥ‖` for a unit vector `f`.
pub fn semiorth_metric(direction: &CVector, f: &CVector) -> Result<f64> {
    let norm = direction.norm();
    if !(norm > 0.0) {
        return Err(Error::domain("semi-orthogonality of a zero direction"));
    }
    Ok((inner(direction, f).norm() / norm).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub group: usize,
    /// Worst-user SINR of the slot after adding `group`.
    pub min_sinr: f64,
    /// Size of the candidate set the group was picked from.
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotSelection {
    pub groups: Vec<usize>,
    pub steps: Vec<SelectionStep>,
    /// Gram-Schmidt vectors `f_1, f_2, …` in the order they were formed.
    #[serde(skip)]
    pub basis: Vec<CVector>,
}

impl SlotSelection {
    /// Every group added at step `n` must be semi-orthogonal to all basis
    /// vectors formed before step `n`. Returns the number of violations.
    pub fn semi_orthogonality_violations(
        &self,
        directions: &[GroupDirection],
        alpha: f64,
    ) -> usize {
        self.steps
            .iter()
            .enumerate()
            .map(|(n, step)| {
                self.basis[..n.min(self.basis.len())]
                    .iter()
                    .filter(|f| {
                        semiorth_metric(&directions[step.group].direction, f)
                            .map_or(true, |m| m >= alpha)
                    })
                    .count()
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GssOutcome {
    pub schedule: Schedule,
    pub slots: Vec<SlotSelection>,
}

fn check_inputs(directions: &[GroupDirection], channels: &ChannelSet, alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if directions.len() != channels.num_groups() {
        return Err(Error::Contract(format!(
            "{} directions for {} groups",
            directions.len(),
            channels.num_groups()
        )));
    }
    Ok(())
}

/// Worst-user SINR of `slot` under the asymptotic beamformers.
pub(crate) fn slot_min_sinr(
    channels: &ChannelSet,
    slot: &[usize],
    power: f64,
    noise: f64,
) -> Result<f64> {
    let ws = asymptotic_beamformers(channels, slot, power, noise)?;
    let sinr = evaluate_sinr(slot, &ws, channels, noise)?;
    Ok(sinr.into_iter().flatten().fold(f64::INFINITY, f64::min))
}

/// Candidate maximizing the slot's worst SINR when added; ties go to the
/// lowest group index.
pub(crate) fn best_addition(
    channels: &ChannelSet,
    selected: &[usize],
    candidates: &[usize],
    power: f64,
    noise: f64,
) -> Result<(usize, f64)> {
    let scores = candidates
        .par_iter()
        .map(|&i| {
            let mut trial = selected.to_vec();
            trial.push(i);
            slot_min_sinr(channels, &trial, power, noise).map(|v| (i, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in scores {
        let v = if v.is_nan() { f64::NEG_INFINITY } else { v };
        match best {
            Some((bi, bv)) if v < bv || (v == bv && i > bi) => {}
            _ => best = Some((i, v)),
        }
    }
    best.ok_or_else(|| Error::Contract("no candidate groups".into()))
}

/// Selects the groups of one slot from the unscheduled set.
pub fn gss_select_slot(
    unscheduled: &[usize],
    directions: &[GroupDirection],
    channels: &ChannelSet,
    alpha: f64,
    power: f64,
    noise: f64,
) -> Result<SlotSelection> {
    check_inputs(directions, channels, alpha)?;
    if unscheduled.is_empty() {
        return Err(Error::Contract("no unscheduled groups to select from".into()));
    }
    let mut candidates = unscheduled.to_vec();
    candidates.sort_unstable();
    candidates.dedup();
    let mut selected = Vec::new();
    let mut steps = Vec::new();
    let mut basis = OrthonormalBasis::new();

    while !candidates.is_empty() {
        let (chosen, min_sinr) = best_addition(channels, &selected, &candidates, power, noise)?;
        selected.push(chosen);
        steps.push(SelectionStep {
            group: chosen,
            min_sinr,
            candidates: candidates.len(),
        });
        let f = match basis.append(&directions[chosen].direction) {
            Ok(f) => f.clone(),
            // The new direction adds no dimension; close the slot.
            Err(Error::DegenerateDirection { .. }) => break,
            Err(e) => return Err(e),
        };
        let mut next = Vec::with_capacity(candidates.len());
        for &i in &candidates {
            if i != chosen && semiorth_metric(&directions[i].direction, &f)? < alpha {
                next.push(i);
            }
        }
        candidates = next;
    }
    Ok(SlotSelection {
        groups: selected,
        steps,
        basis: basis.vectors().to_vec(),
    })
}

/// Fills slots one after another until every group is scheduled.
pub fn mgms_gss(
    directions: &[GroupDirection],
    channels: &ChannelSet,
    alpha: f64,
    power: f64,
    noise: f64,
) -> Result<GssOutcome> {
    check_inputs(directions, channels, alpha)?;
    let mut unscheduled: Vec<usize> = (0..channels.num_groups()).collect();
    let mut slots = Vec::new();
    while !unscheduled.is_empty() {
        let slot = gss_select_slot(&unscheduled, directions, channels, alpha, power, noise)?;
        unscheduled.retain(|i| !slot.groups.contains(i));
        slots.push(slot);
    }
    let schedule = Schedule::new(slots.iter().map(|s| s.groups.clone()).collect());
    Ok(GssOutcome { schedule, slots })
}
