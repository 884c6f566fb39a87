//! Scheduling by group spatial correlation.
//!
//! Group directions are normalized and phase-aligned into a feature space and
//! clustered by mean shift with a truncated Gaussian kernel; clusters are
//! formed one at a time from the points not yet assigned. Groups in the same
//! cluster interfere strongly, so the post-processing step puts at most one
//! group of each cluster into a slot, needing as many slots as the largest
//! cluster has members.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::direction::GroupDirection;
use crate::error::{Error, Result};
use crate::gss::best_addition;
use crate::model::{CVector, ChannelSet};
use crate::numerics::phase_align;
use crate::schedule::Schedule;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpace {
    /// Unit-norm, phase-aligned `y_i`.
    pub points: Vec<CVector>,
    /// Group id of each point.
    pub groups: Vec<usize>,
}

impl FeatureSpace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn build_feature_space(directions: &[GroupDirection]) -> Result<FeatureSpace> {
    let points = directions
        .iter()
        .map(|d| phase_align(&d.direction).map_err(|e| e.in_group(d.group)))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureSpace {
        points,
        groups: directions.iter().map(|d| d.group).collect(),
    })
}

fn default_tolerance() -> f64 {
    1e-3
}
fn default_max_iterations() -> usize {
    100
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GscSettings {
    /// Stop once `‖c⁽ˡ⁺¹⁾ − c⁽ˡ⁾‖` is at most this.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

impl Default for GscSettings {
    fn default() -> Self {
        GscSettings {
            tolerance: default_tolerance(),
            max_iterations: default_max_iterations(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    #[serde(with = "crate::serde_complex::vector")]
    pub centroid: CVector,
    /// Group ids, ascending.
    pub members: Vec<usize>,
    /// Centroid updates performed.
    pub iterations: usize,
    pub converged: bool,
    /// `‖c⁽ˡ⁺¹⁾ − c⁽ˡ⁾‖` per update.
    pub shifts: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub tau: f64,
    pub clusters: Vec<Cluster>,
}

impl Clustering {
    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn largest_size(&self) -> usize {
        self.clusters.iter().map(|c| c.members.len()).max().unwrap_or(0)
    }

    /// Cluster index of each group.
    pub fn labels(&self, num_groups: usize) -> Vec<Option<usize>> {
        let mut labels = vec![None; num_groups];
        for (r, c) in self.clusters.iter().enumerate() {
            for &i in &c.members {
                if i < num_groups {
                    labels[i] = Some(r);
                }
            }
        }
        labels
    }
}

fn distance_sq(a: &CVector, b: &CVector) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum()
}

/// One truncated-Gaussian mean-shift update. `None` when the window is empty
/// or the weighted mean vanishes.
fn shift_centroid(points: &[CVector], centroid: &CVector, tau: f64) -> Option<CVector> {
    let mut sum = CVector::zeros(centroid.len());
    let mut weight = 0.0;
    for y in points {
        let d2 = distance_sq(y, centroid);
        if d2 < tau * tau {
            let w = (-d2 / (2.0 * tau * tau)).exp();
            sum.axpy(w.into(), y, 1.0.into());
            weight += w;
        }
    }
    if weight == 0.0 {
        return None;
    }
    sum.unscale_mut(weight);
    let norm = sum.norm();
    if !(norm >= 1e-12) {
        return None;
    }
    sum.unscale_mut(norm);
    Some(sum)
}

/// Sequential mean-shift clustering of the feature space.
///
/// Each cluster starts at the unassigned point with the lowest group id and
/// iterates over the whole space. Once the centroid settles, the cluster takes
/// the not-yet-assigned points inside its window, so the result partitions
/// the groups.
pub fn mean_shift_cluster(
    space: &FeatureSpace,
    tau: f64,
    settings: &GscSettings,
) -> Result<Clustering> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::domain(format!("tau must be positive, got {tau}")));
    }
    if !(settings.tolerance > 0.0) || settings.max_iterations == 0 {
        return Err(Error::domain("need tolerance > 0 and max_iterations >= 1"));
    }
    let mut order: Vec<usize> = (0..space.len()).collect();
    order.sort_by_key(|&p| space.groups[p]);
    let mut remaining = order;
    let mut clusters = Vec::new();

    while let Some(&seed) = remaining.first() {
        let mut centroid = space.points[seed].clone();
        let mut shifts = Vec::new();
        let mut converged = false;
        while shifts.len() < settings.max_iterations {
            let Some(next) = shift_centroid(&space.points, &centroid, tau) else {
                converged = true;
                break;
            };
            let shift = distance_sq(&next, &centroid).sqrt();
            centroid = next;
            shifts.push(shift);
            if shift <= settings.tolerance {
                converged = true;
                break;
            }
        }
        let mut taken: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&p| distance_sq(&space.points[p], &centroid) < tau * tau)
            .collect();
        if taken.is_empty() {
            // The centroid drifted away from every unassigned point.
            centroid = space.points[seed].clone();
            taken.push(seed);
        }
        remaining.retain(|p| !taken.contains(p));
        let mut members: Vec<usize> = taken.iter().map(|&p| space.groups[p]).collect();
        members.sort_unstable();
        clusters.push(Cluster {
            centroid,
            members,
            iterations: shifts.len(),
            converged,
            shifts,
        });
    }
    Ok(Clustering { tau, clusters })
}

/// Post-processing: one group per cluster per slot.
///
/// Each slot opens with a uniformly random member of the largest cluster
/// (lowest cluster index on ties); every other nonempty cluster then adds the
/// member that keeps the slot's worst SINR highest under the asymptotic
/// beamformers.
pub fn mgms_gsc<R: Rng + ?Sized>(
    clustering: &Clustering,
    channels: &ChannelSet,
    power: f64,
    noise: f64,
    rng: &mut R,
) -> Result<Schedule> {
    let g = channels.num_groups();
    let labels = clustering.labels(g);
    if let Some(i) = labels.iter().position(Option::is_none) {
        return Err(Error::Contract(format!("group {i} is not in any cluster")));
    }
    let assigned: usize = clustering.clusters.iter().map(|c| c.members.len()).sum();
    if assigned != g {
        return Err(Error::Contract("clusters overlap or name unknown groups".into()));
    }
    let mut pools: Vec<Vec<usize>> = clustering
        .clusters
        .iter()
        .map(|c| c.members.clone())
        .collect();
    let g_max = clustering.largest_size();
    let r_max = clustering
        .clusters
        .iter()
        .position(|c| c.members.len() == g_max)
        .ok_or_else(|| Error::Contract("empty clustering".into()))?;

    let mut slots = Vec::with_capacity(g_max);
    for _ in 0..g_max {
        let pick = rng.random_range(0..pools[r_max].len());
        let mut slot = vec![pools[r_max].remove(pick)];
        for r in 0..pools.len() {
            if r == r_max || pools[r].is_empty() {
                continue;
            }
            let (chosen, _) = best_addition(channels, &slot, &pools[r], power, noise)?;
            pools[r].retain(|&i| i != chosen);
            slot.push(chosen);
        }
        slots.push(slot);
    }
    Ok(Schedule::new(slots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{complex_gaussian, CMatrix, GroupChannels, C64};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space(points: Vec<CVector>) -> FeatureSpace {
        let n = points.len();
        FeatureSpace {
            points: points.iter().map(|p| phase_align(p).unwrap()).collect(),
            groups: (0..n).collect(),
        }
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn direction(i: usize, v: CVector) -> GroupDirection {
        GroupDirection {
            group: i,
            weights: CVector::from_element(1, c(1.0, 0.0)),
            direction: v,
            min_gain: 0.0,
            trace: vec![],
        }
    }

    fn random_channels(rng: &mut ChaCha8Rng, n: usize, g: usize) -> ChannelSet {
        let groups = (0..g)
            .map(|_| {
                GroupChannels::from_channels(CMatrix::from_fn(n, 1, |_, _| complex_gaussian(rng)))
                    .unwrap()
            })
            .collect();
        ChannelSet::new(groups).unwrap()
    }

    fn clustering_of(sizes: &[usize]) -> Clustering {
        let mut next = 0;
        let clusters = sizes
            .iter()
            .map(|&s| {
                let members = (next..next + s).collect();
                next += s;
                Cluster {
                    centroid: CVector::zeros(1),
                    members,
                    iterations: 1,
                    converged: true,
                    shifts: vec![0.0],
                }
            })
            .collect();
        Clustering { tau: 0.5, clusters }
    }

    #[test]
    fn feature_space_examples() {
        let fs = build_feature_space(&[
            direction(0, CVector::from_vec(vec![c(2.0, 0.0), c(0.0, 0.0)])),
            direction(1, CVector::from_vec(vec![c(1.0, 1.0), c(1.0, -1.0)])),
            direction(2, CVector::from_vec(vec![c(1.0, 1.0), c(1.0, -1.0)])),
        ])
        .unwrap();
        assert_eq!(fs.points[0], CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        let y = &fs.points[1];
        assert!((y.norm() - 1.0).abs() < 1e-12);
        assert!(y[0].im == 0.0 && y[0].re > 0.0);
        let expected = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, -1.0)]) / c(2f64.sqrt(), 0.0);
        assert!((y - expected).norm() < 1e-12);
        assert_eq!(fs.points[1], fs.points[2]);

        let bad = build_feature_space(&[direction(7, CVector::zeros(2))]);
        assert!(matches!(bad, Err(Error::Group { group: 7, .. })));
    }

    #[test]
    fn identical_points_form_one_cluster() {
        let v = CVector::from_vec(vec![c(0.3, 0.1), c(-0.5, 0.2), c(0.1, 0.9)]);
        let fs = space(vec![v.clone(), v.clone(), v.clone(), v]);
        let out = mean_shift_cluster(&fs, 0.5, &GscSettings::default()).unwrap();
        assert_eq!(out.num_clusters(), 1);
        assert_eq!(out.clusters[0].iterations, 1);
        assert!((&out.clusters[0].centroid - &fs.points[0]).norm() < 1e-12);
    }

    #[test]
    fn wide_window_takes_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = (0..6)
            .map(|_| CVector::from_fn(4, |_, _| complex_gaussian(&mut rng)))
            .collect();
        let out = mean_shift_cluster(&space(pts), 2.1, &GscSettings::default()).unwrap();
        assert_eq!(out.num_clusters(), 1);
        assert_eq!(out.clusters[0].members, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn two_bundles_separate() {
        let e = |i: usize, eps: f64| {
            let mut v = CVector::from_fn(3, |r, _| c(if r == i { 1.0 } else { 0.0 }, 0.0));
            v[(i + 1) % 3] = c(eps, 0.0);
            v
        };
        let fs = space(vec![e(0, 0.0), e(1, 0.0), e(0, 0.03), e(1, 0.04), e(0, -0.02)]);
        for i in 0..5 {
            for j in 0..5 {
                let d = distance_sq(&fs.points[i], &fs.points[j]).sqrt();
                if i % 2 == j % 2 {
                    assert!(d < 0.1);
                } else {
                    assert!(d > 1.3);
                }
            }
        }
        let out = mean_shift_cluster(&fs, 0.5, &GscSettings::default()).unwrap();
        assert_eq!(out.num_clusters(), 2);
        assert_eq!(out.clusters[0].members, vec![0, 2, 4]);
        assert_eq!(out.clusters[1].members, vec![1, 3]);
        for cl in &out.clusters {
            assert!((cl.centroid.norm() - 1.0).abs() < 1e-9);
            for &m in &cl.members {
                assert!(distance_sq(&fs.points[m], &cl.centroid).sqrt() < 0.5);
            }
        }
    }

    #[test]
    fn rejects_bad_tau() {
        let fs = space(vec![CVector::from_element(2, c(1.0, 0.0))]);
        assert!(mean_shift_cluster(&fs, 0.0, &GscSettings::default()).is_err());
    }

    #[test]
    fn post_processing_slot_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let set = random_channels(&mut rng, 4, 5);
        let s = mgms_gsc(&clustering_of(&[3, 2]), &set, 10.0, 1.0, &mut rng).unwrap();
        assert_eq!(s.num_slots(), 3);
        let mut sizes = s.slot_sizes();
        sizes.sort();
        assert_eq!(sizes, vec![1, 2, 2]);
        s.validate(5).unwrap();

        let s = mgms_gsc(&clustering_of(&[1, 1, 1, 1, 1]), &set, 10.0, 1.0, &mut rng).unwrap();
        assert_eq!(s.num_slots(), 1);
        let s = mgms_gsc(&clustering_of(&[5]), &set, 10.0, 1.0, &mut rng).unwrap();
        assert_eq!(s.slot_sizes(), vec![1; 5]);
    }

    #[test]
    fn slots_never_repeat_a_cluster() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let set = random_channels(&mut rng, 4, 9);
        let cl = clustering_of(&[2, 4, 3]);
        let s = mgms_gsc(&cl, &set, 10.0, 1.0, &mut rng).unwrap();
        let labels = cl.labels(9);
        for slot in &s.slots {
            let mut seen: Vec<_> = slot.iter().map(|&i| labels[i]).collect();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), slot.len());
        }
        assert_eq!(s.num_slots(), 4);
    }

    #[test]
    fn incomplete_clustering_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let set = random_channels(&mut rng, 3, 4);
        assert!(mgms_gsc(&clustering_of(&[3]), &set, 1.0, 1.0, &mut rng).is_err());
    }
}
