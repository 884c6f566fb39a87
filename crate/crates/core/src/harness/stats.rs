//! Aggregation helpers for sweep results.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::sweep::ExperimentResult;
use crate::error::{Error, Result};

/// Right-continuous step CDF: `(value, P[X <= value])` at each distinct value.
pub fn empirical_cdf(samples: &[usize]) -> Result<Vec<(usize, f64)>> {
    if samples.is_empty() {
        return Err(Error::domain("CDF of an empty sample"));
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &s in samples {
        *counts.entry(s).or_default() += 1;
    }
    let total = samples.len() as f64;
    let mut running = 0;
    let mut cdf: Vec<(usize, f64)> = counts
        .into_iter()
        .map(|(v, c)| {
            running += c;
            (v, running as f64 / total)
        })
        .collect();
    if let Some(last) = cdf.last_mut() {
        last.1 = 1.0;
    }
    Ok(cdf)
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties. `None` when either
/// side is constant or the lengths differ.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Per-antenna-count averages when each instance uses its own best threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestThresholdRow {
    pub num_antennas: usize,
    pub mean_best_throughput: f64,
    pub mean_t_at_best: f64,
    pub instances: usize,
}

/// For every `(N, drop, realization)`, picks the threshold with the highest
/// min-throughput (lowest threshold index on ties) and averages over instances.
pub fn best_threshold_summary(result: &ExperimentResult) -> Vec<BestThresholdRow> {
    let mut best: BTreeMap<(usize, usize, usize), (f64, usize, usize)> = BTreeMap::new();
    for r in result.records.iter().filter(|r| r.ok) {
        let Some(tp) = r.min_throughput else { continue };
        let key = (r.num_antennas, r.drop, r.realization);
        let entry = best.entry(key).or_insert((tp, r.threshold_index, r.num_slots));
        if tp > entry.0 || (tp == entry.0 && r.threshold_index < entry.1) {
            *entry = (tp, r.threshold_index, r.num_slots);
        }
    }
    result
        .config
        .antenna_grid
        .iter()
        .filter_map(|&n| {
            let rows: Vec<_> = best
                .iter()
                .filter(|((bn, _, _), _)| *bn == n)
                .map(|(_, v)| *v)
                .collect();
            (!rows.is_empty()).then(|| {
                let k = rows.len() as f64;
                BestThresholdRow {
                    num_antennas: n,
                    mean_best_throughput: rows.iter().map(|r| r.0).sum::<f64>() / k,
                    mean_t_at_best: rows.iter().map(|r| r.2 as f64).sum::<f64>() / k,
                    instances: rows.len(),
                }
            })
        })
        .collect()
}
