//! Group-channel directions.
//!
//! Each group is treated as the only group in the system. Its beamformer has
//! the form `w = R̃⁻¹ H a` with the closed-form covariance approximation
//! `R̃ = I + (P β̃ / σ² K) Σ g gᴴ`, and the weights `a` are chosen by projected
//! subgradient ascent on the worst user's gain. The direction `ĥ = H a` is the
//! group's spatial signature for scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CMatrix, CVector, ChannelSet, GroupChannels, SystemConfig, C64};
use crate::numerics::{harmonic_mean, HpdMatrix};
use crate::psa::{maximize, MaxMinProblem, PsaSettings, TracePoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDirection {
    pub group: usize,
    /// `a_i`, one weight per user.
    #[serde(with = "crate::serde_complex::vector")]
    pub weights: CVector,
    /// `ĥ_i = H_i a_i`.
    #[serde(with = "crate::serde_complex::vector")]
    pub direction: CVector,
    /// `min_k |a_iᴴ H_iᴴ R̃_i⁻¹ h_ik|²` at the returned weights.
    pub min_gain: f64,
    #[serde(skip)]
    pub trace: Vec<TracePoint>,
}

/// `I + (P β̃ / (σ² K)) Σ_k g_k g_kᴴ` with `β̃` the harmonic mean of the
/// group's channel variances.
pub fn approx_cov_single(group: &GroupChannels, power: f64, noise: f64) -> Result<HpdMatrix> {
    if !(power >= 0.0) || !(noise > 0.0) {
        return Err(Error::domain("need power >= 0 and noise > 0"));
    }
    let beta = harmonic_mean(group.variances())?;
    let scale = power * beta / (noise * group.num_users() as f64);
    HpdMatrix::identity_plus_gram(group.normalized(), scale)
}

/// `max_a min_k |(Aa)_k|²` s.t. `aᴴ M a = P`, with `A = Xᴴ H` and
/// `M = Xᴴ X` for `X = R̃⁻¹ H`.
struct SingleGroupProblem {
    gains: CMatrix,
    gram: CMatrix,
    power: f64,
}

impl MaxMinProblem for SingleGroupProblem {
    fn values(&self, a: &CVector) -> Vec<f64> {
        (&self.gains * a).iter().map(|z| z.norm_sqr()).collect()
    }

    fn gradients(&self, a: &CVector, terms: &[usize]) -> Vec<CVector> {
        terms
            .iter()
            .map(|&k| {
                let row = self.gains.row(k);
                let value: C64 = (row * a)[(0, 0)];
                row.adjoint() * value
            })
            .collect()
    }

    fn constraint_normal(&self, a: &CVector) -> CVector {
        &self.gram * a
    }

    fn project(&self, a: &mut CVector) {
        let p = a.dotc(&(&self.gram * &*a)).re;
        if p > 0.0 {
            *a *= C64::from((self.power / p).sqrt());
        }
    }
}

/// Solves the single-group weight problem for one group.
pub fn psa_single_group(
    group_index: usize,
    group: &GroupChannels,
    cov: &HpdMatrix,
    power: f64,
    settings: &PsaSettings,
) -> Result<GroupDirection> {
    settings.validate()?;
    if !(power > 0.0) {
        return Err(Error::domain("power budget must be positive"));
    }
    let h = group.channels();
    if h.norm() == 0.0 {
        return Err(Error::domain("all-zero group channels"));
    }
    let x = cov.solve(h)?;
    let problem = SingleGroupProblem {
        gains: x.adjoint() * h,
        gram: x.adjoint() * &x,
        power,
    };
    let start = CVector::from_iterator(
        group.num_users(),
        group.variances().iter().map(|b| C64::from(b.recip())),
    );
    let outcome = maximize(&problem, start, settings);
    let direction = h * &outcome.best;
    if direction.norm() == 0.0 {
        return Err(Error::domain("group direction vanished"));
    }
    Ok(GroupDirection {
        group: group_index,
        weights: outcome.best,
        direction,
        min_gain: outcome.best_value,
        trace: outcome.trace,
    })
}

/// One direction per group, each computed as if the group were alone.
pub fn all_group_directions(
    channels: &ChannelSet,
    config: &SystemConfig,
    settings: &PsaSettings,
) -> Result<Vec<GroupDirection>> {
    settings.validate()?;
    channels
        .groups()
        .par_iter()
        .enumerate()
        .map(|(i, group)| {
            let cov = approx_cov_single(group, config.power_budget, config.noise_variance)?;
            psa_single_group(i, group, &cov, config.power_budget, settings)
        })
        .enumerate()
        .map(|(i, r)| r.map_err(|e| e.in_group(i)))
        .collect()
}
