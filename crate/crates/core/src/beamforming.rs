//! Per-slot multicast beamforming: SINR and rate evaluation, the closed-form
//! asymptotic beamformer used during scheduling, and the max-min fair solver
//! run once a slot's groups are fixed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CMatrix, CVector, ChannelSet, C64};
use crate::numerics::HpdMatrix;
use crate::psa::{maximize, MaxMinProblem, PsaSettings, TracePoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotBeamformers {
    pub slot: usize,
    pub groups: Vec<usize>,
    /// `w_i`, parallel to `groups`.
    #[serde(with = "beamformer_list")]
    pub beamformers: Vec<CVector>,
    /// Linear SINR per user, indexed like `groups` then by user.
    pub sinr: Vec<Vec<f64>>,
    /// bits/s/Hz.
    pub rates: Vec<Vec<f64>>,
    pub min_rate: f64,
    #[serde(skip)]
    pub trace: Vec<TracePoint>,
}

impl SlotBeamformers {
    pub fn min_sinr(&self) -> f64 {
        self.sinr.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn total_power(&self) -> f64 {
        self.beamformers.iter().map(|w| w.norm_squared()).sum()
    }
}

mod beamformer_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::model::{CVector, C64};

    pub fn serialize<S: Serializer>(ws: &[CVector], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<Vec<[f64; 2]>> = ws
            .iter()
            .map(|w| w.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CVector>, D::Error> {
        let raw = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|w| CVector::from_iterator(w.len(), w.into_iter().map(|[re, im]| C64::new(re, im))))
            .collect())
    }
}

fn check_groups(channels: &ChannelSet, groups: &[usize]) -> Result<()> {
    if groups.is_empty() {
        return Err(Error::Contract("slot has no groups".into()));
    }
    if let Some(&i) = groups.iter().find(|&&i| i >= channels.num_groups()) {
        return Err(Error::Contract(format!("unknown group {i}")));
    }
    Ok(())
}

/// `SINR_ik = |w_iᴴ h_ik|² / (Σ_{j≠i} |w_jᴴ h_ik|² + σ²)` for every user of
/// every group in `groups`. `beamformers[m]` belongs to `groups[m]`.
pub fn evaluate_sinr(
    groups: &[usize],
    beamformers: &[CVector],
    channels: &ChannelSet,
    noise: f64,
) -> Result<Vec<Vec<f64>>> {
    check_groups(channels, groups)?;
    if beamformers.len() != groups.len() {
        return Err(Error::Contract(format!(
            "{} groups but {} beamformers",
            groups.len(),
            beamformers.len()
        )));
    }
    if let Some(w) = beamformers.iter().find(|w| w.len() != channels.num_antennas()) {
        return Err(Error::Contract(format!(
            "beamformer has {} entries, expected {}",
            w.len(),
            channels.num_antennas()
        )));
    }
    let sinr = groups
        .iter()
        .enumerate()
        .map(|(m, &i)| {
            let h = channels.group(i).channels();
            // Row j holds w_jᴴ h_ik for every user k.
            let projections: Vec<Vec<f64>> = beamformers
                .iter()
                .map(|w| (w.adjoint() * h).iter().map(|z| z.norm_sqr()).collect())
                .collect();
            (0..h.ncols())
                .map(|k| {
                    let interference: f64 = projections
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != m)
                        .map(|(_, row)| row[k])
                        .sum();
                    projections[m][k] / (interference + noise)
                })
                .collect()
        })
        .collect();
    Ok(sinr)
}

pub fn rate_from_sinr(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}

/// Closed-form large-antenna beamformers `w_j = c_j R̄⁻¹ H_j q_j` for the
/// groups in `groups`, with `q_j = [1/β_j1, …]` and
/// `R̄ = I + (P β̄ / (σ² Σ K)) Σ g gᴴ` over all their users. The scalings
/// `c_j` split the power budget in proportion to `Σ_k 1/β_jk`, so the total
/// power is exactly `P`.
pub fn asymptotic_beamformers(
    channels: &ChannelSet,
    groups: &[usize],
    power: f64,
    noise: f64,
) -> Result<Vec<CVector>> {
    check_groups(channels, groups)?;
    if !(power > 0.0) || !(noise > 0.0) {
        return Err(Error::domain("need positive power and noise"));
    }
    let n = channels.num_antennas();
    let total_users: usize = groups.iter().map(|&i| channels.group(i).num_users()).sum();
    let mut stacked = CMatrix::zeros(n, total_users);
    let mut col = 0;
    let mut inverse_sums = Vec::with_capacity(groups.len());
    for &i in groups {
        let g = channels.group(i);
        stacked
            .columns_mut(col, g.num_users())
            .copy_from(g.normalized());
        col += g.num_users();
        inverse_sums.push(g.variances().iter().map(|b| b.recip()).sum::<f64>());
    }
    let inverse_total: f64 = inverse_sums.iter().sum();
    let beta_bar = total_users as f64 / inverse_total;
    let r_bar = HpdMatrix::identity_plus_gram(
        &stacked,
        power * beta_bar / (noise * total_users as f64),
    )?;

    groups
        .iter()
        .zip(&inverse_sums)
        .map(|(&i, &s_j)| {
            let g = channels.group(i);
            let q = CVector::from_iterator(
                g.num_users(),
                g.variances().iter().map(|b| C64::from(b.recip())),
            );
            let hq = g.channels() * q;
            let v = r_bar.solve_vector(&hq)?;
            let c = (power * s_j / (inverse_total * v.norm_squared())).sqrt();
            Ok(v * C64::from(c))
        })
        .collect()
}

/// Max-min SINR over concatenated beamformers `[w_1; …; w_m]`.
struct SlotProblem {
    /// All users' channels side by side, `N × U`.
    channels: CMatrix,
    /// Position of each user's group within the slot.
    owners: Vec<usize>,
    n: usize,
    num_groups: usize,
    power: f64,
    noise: f64,
}

impl SlotProblem {
    /// `Z[u, j] = w_jᴴ h_u` for every user and group.
    fn projections(&self, x: &CVector) -> CMatrix {
        let w = CMatrix::from_column_slice(self.n, self.num_groups, x.as_slice());
        self.channels.ad_mul(&w).map(|z| z.conj())
    }

    /// Signal power and interference-plus-noise of user `u`.
    fn terms(&self, z: &CMatrix, u: usize) -> (f64, f64) {
        let owner = self.owners[u];
        let mut interference = self.noise;
        for j in 0..self.num_groups {
            if j != owner {
                interference += z[(u, j)].norm_sqr();
            }
        }
        (z[(u, owner)].norm_sqr(), interference)
    }
}

impl MaxMinProblem for SlotProblem {
    fn values(&self, x: &CVector) -> Vec<f64> {
        let z = self.projections(x);
        (0..self.owners.len())
            .map(|u| {
                let (signal, interference) = self.terms(&z, u);
                signal / interference
            })
            .collect()
    }

    fn gradients(&self, x: &CVector, terms: &[usize]) -> Vec<CVector> {
        let z = self.projections(x);
        terms
            .iter()
            .map(|&k| {
                let (signal, interference) = self.terms(&z, k);
                let h = self.channels.column(k);
                let mut grad = CVector::zeros(x.len());
                for j in 0..self.num_groups {
                    // ∂|w_jᴴ h|²/∂w_j* = h (hᴴ w_j) = h · conj(w_jᴴ h)
                    let zj = z[(k, j)];
                    let coeff = if j == self.owners[k] {
                        zj.conj() / interference
                    } else {
                        -zj.conj() * (signal / (interference * interference))
                    };
                    grad.rows_mut(j * self.n, self.n)
                        .axpy(coeff, &h, C64::from(0.0));
                }
                grad
            })
            .collect()
    }

    fn constraint_normal(&self, x: &CVector) -> CVector {
        x.clone()
    }

    fn project(&self, x: &mut CVector) {
        let p = x.norm_squared();
        if p > 0.0 {
            *x *= C64::from((self.power / p).sqrt());
        }
    }
}

/// Max-min fair beamformers for one slot.
///
/// Starts from the asymptotic beamformers and runs projected subgradient
/// ascent on the minimum SINR over all scheduled users. Iterates stay in the
/// span of the slot's channels, which contains every `R⁻¹ H_i a_i` of the
/// optimal structure. The best iterate is returned at full power.
pub fn psa_mmf_slot(
    slot: usize,
    channels: &ChannelSet,
    groups: &[usize],
    power: f64,
    noise: f64,
    settings: &PsaSettings,
) -> Result<SlotBeamformers> {
    settings.validate()?;
    let start = asymptotic_beamformers(channels, groups, power, noise)?;
    let n = channels.num_antennas();
    let mut owners = Vec::new();
    let mut columns = Vec::new();
    for (m, &i) in groups.iter().enumerate() {
        for h in channels.group(i).channels().column_iter() {
            owners.push(m);
            columns.push(h.into_owned());
        }
    }
    let problem = SlotProblem {
        channels: CMatrix::from_columns(&columns),
        owners,
        n,
        num_groups: groups.len(),
        power,
        noise,
    };
    let mut x0 = CVector::zeros(n * groups.len());
    for (m, w) in start.iter().enumerate() {
        x0.rows_mut(m * n, n).copy_from(w);
    }
    let outcome = maximize(&problem, x0, settings);
    let beamformers: Vec<CVector> = (0..groups.len())
        .map(|m| outcome.best.rows(m * n, n).into_owned())
        .collect();
    let sinr = evaluate_sinr(groups, &beamformers, channels, noise)?;
    let rates: Vec<Vec<f64>> = sinr
        .iter()
        .map(|g| g.iter().map(|&s| rate_from_sinr(s)).collect())
        .collect();
    let min_rate = rates.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    Ok(SlotBeamformers {
        slot,
        groups: groups.to_vec(),
        beamformers,
        sinr,
        rates,
        min_rate,
        trace: outcome.trace,
    })
}

/// Worst user rate over all slots, divided by the number of slots.
pub fn min_throughput(slots: &[SlotBeamformers]) -> Result<f64> {
    if slots.is_empty() {
        return Err(Error::domain("throughput of an empty schedule"));
    }
    let worst = slots.iter().map(|s| s.min_rate).fold(f64::INFINITY, f64::min);
    Ok(worst / slots.len() as f64)
}
