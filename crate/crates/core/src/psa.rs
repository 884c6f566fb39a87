//! Projected subgradient ascent for max-min objectives over complex vectors.
//!
//! Both the single-group direction problem and the per-slot multi-group
//! beamforming problem are instances of `max_x min_k f_k(x)` over a power
//! sphere. The engine takes the Wirtinger gradient of the active (minimizing)
//! term, steps with a diminishing, scale-relative step, projects radially back
//! onto the power boundary and keeps the best iterate seen.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

use crate::model::{CVector, C64};

fn default_max_iterations() -> usize {
    300
}
fn default_initial_step() -> f64 {
    1.0
}
fn default_stall_window() -> usize {
    50
}
fn default_stall_tolerance() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsaSettings {
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Step at the first iteration, relative to the iterate's norm. Iteration
    /// `l` uses `initial_step / √l`.
    #[serde(default = "default_initial_step")]
    pub initial_step: f64,
    /// Stop once the best objective has not improved by `stall_tolerance`
    /// (relative) over this many iterations.
    #[serde(default = "default_stall_window")]
    pub stall_window: usize,
    #[serde(default = "default_stall_tolerance")]
    pub stall_tolerance: f64,
}

impl Default for PsaSettings {
    fn default() -> Self {
        PsaSettings {
            max_iterations: default_max_iterations(),
            initial_step: default_initial_step(),
            stall_window: default_stall_window(),
            stall_tolerance: default_stall_tolerance(),
        }
    }
}

impl PsaSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::domain("PSA max_iterations must be at least 1"));
        }
        if !(self.initial_step > 0.0) || !self.initial_step.is_finite() {
            return Err(Error::domain(format!(
                "PSA initial_step must be positive, got {}",
                self.initial_step
            )));
        }
        if self.stall_window == 0 || !(self.stall_tolerance >= 0.0) {
            return Err(Error::domain("PSA stall window must be >= 1 and tolerance >= 0"));
        }
        Ok(())
    }

    pub fn step(&self, iteration: usize) -> f64 {
        self.initial_step / (iteration as f64).sqrt()
    }
}

/// A max-min problem `max_x min_k value_k(x)` on a power boundary reached by
/// radial scaling.
pub(crate) trait MaxMinProblem {
    fn values(&self, x: &CVector) -> Vec<f64>;
    /// Wirtinger gradients `∂ value_k / ∂ x*` for each `k` in `terms`.
    fn gradients(&self, x: &CVector, terms: &[usize]) -> Vec<CVector>;
    /// Wirtinger gradient of the power constraint at `x`.
    fn constraint_normal(&self, x: &CVector) -> CVector;
    /// Scales `x` onto the power boundary.
    fn project(&self, x: &mut CVector);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub objective: f64,
    pub best_objective: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct PsaOutcome {
    pub best: CVector,
    pub best_value: f64,
    pub trace: Vec<TracePoint>,
}

/// Smallest value and the lowest index attaining it.
pub(crate) fn min_with_index(values: impl Iterator<Item = f64>) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for (k, v) in values.enumerate() {
        if v < best.0 {
            best = (v, k);
        }
    }
    best
}

/// Step halvings tried before an iteration is declared non-improving.
const MAX_HALVINGS: usize = 30;

/// Minimum-norm point of the convex hull of `vectors`.
fn min_norm_combination(vectors: &[CVector]) -> CVector {
    let q = DMatrix::from_fn(vectors.len(), vectors.len(), |i, j| {
        vectors[i].dotc(&vectors[j]).re
    });
    let lambda = min_norm_weights(&q);
    let mut out = CVector::zeros(vectors[0].len());
    for (l, v) in lambda.iter().zip(vectors) {
        if *l != 0.0 {
            out.axpy(C64::from(*l), v, C64::from(1.0));
        }
    }
    out
}

/// Convex weights of the minimum-norm point of a hull given by its Gram
/// matrix `q`, by Wolfe's active-set algorithm.
fn min_norm_weights(q: &DMatrix<f64>) -> Vec<f64> {
    const EPS: f64 = 1e-12;
    let m = q.nrows();
    let scale = q.diagonal().max().max(f64::MIN_POSITIVE);
    let start = (0..m)
        .min_by(|&a, &b| q[(a, a)].total_cmp(&q[(b, b)]))
        .unwrap_or(0);
    let mut support = vec![start];
    let mut lambda = vec![0.0; m];
    lambda[start] = 1.0;

    for _ in 0..(10 * m + 10) {
        // Inner products of the current point with every vertex.
        let xp: Vec<f64> = (0..m)
            .map(|i| support.iter().map(|&s| lambda[s] * q[(s, i)]).sum())
            .collect();
        let xx: f64 = support.iter().map(|&s| lambda[s] * xp[s]).sum();
        let Some(j) = (0..m)
            .filter(|i| !support.contains(i))
            .min_by(|&a, &b| xp[a].total_cmp(&xp[b]))
        else {
            break;
        };
        if xx - xp[j] <= EPS * scale {
            break;
        }
        support.push(j);

        loop {
            // Minimum-norm point of the support's affine hull.
            let k = support.len();
            let mut system = DMatrix::<f64>::zeros(k + 1, k + 1);
            let mut rhs = DVector::<f64>::zeros(k + 1);
            for (a, &sa) in support.iter().enumerate() {
                for (b, &sb) in support.iter().enumerate() {
                    system[(a, b)] = q[(sa, sb)];
                }
                system[(a, k)] = 1.0;
                system[(k, a)] = 1.0;
            }
            rhs[k] = 1.0;
            let Some(mu) = system.lu().solve(&rhs) else {
                return lambda;
            };
            if (0..k).all(|a| mu[a] > EPS) {
                for (a, &sa) in support.iter().enumerate() {
                    lambda[sa] = mu[a];
                }
                break;
            }
            // Move toward the affine point until a weight reaches zero.
            let theta = (0..k)
                .filter(|&a| mu[a] <= EPS)
                .map(|a| {
                    let l = lambda[support[a]];
                    l / (l - mu[a])
                })
                .fold(1.0f64, f64::min);
            for (a, &sa) in support.iter().enumerate() {
                lambda[sa] += theta * (mu[a] - lambda[sa]);
            }
            support.retain(|&sa| {
                if lambda[sa] <= EPS {
                    lambda[sa] = 0.0;
                    false
                } else {
                    true
                }
            });
            if support.is_empty() {
                lambda[start] = 1.0;
                return lambda;
            }
        }
    }
    lambda
}

/// Projected subgradient ascent from `start`.
///
/// Each iteration considers the gradient of the lowest term (lowest index on
/// ties) and, when other terms lie within a relative margin `γ₀/√l` of the
/// minimum, the minimum-norm element of the convex hull of all those terms'
/// gradients. The latter moves along kinks where single-term steps zigzag.
/// Directions are restricted to the tangent space of the power boundary. For
/// each, a move of `γ₀/√l` times the iterate's norm is halved until the
/// minimum improves, followed by radial projection; the better candidate is
/// kept. The run stops early once an iteration finds no improving step.
pub(crate) fn maximize<P: MaxMinProblem>(
    problem: &P,
    start: CVector,
    settings: &PsaSettings,
) -> PsaOutcome {
    let mut x = start;
    problem.project(&mut x);
    let mut values = problem.values(&x);
    let (mut value, _) = min_with_index(values.iter().copied());
    let mut best = x.clone();
    let mut best_value = value;
    let mut trace = vec![TracePoint {
        iteration: 0,
        objective: value,
        best_objective: best_value,
    }];
    let mut last_gain_iteration = 0;
    let mut reference = best_value;

    for l in 1..=settings.max_iterations {
        let step = settings.step(l);
        let normal = problem.constraint_normal(&x);
        let normal_sq = normal.norm_squared();
        let (_, active) = min_with_index(values.iter().copied());
        let margin = value + step * value.abs();
        let mut terms = vec![active];
        terms.extend((0..values.len()).filter(|&k| k != active && values[k] <= margin));
        let tangent: Vec<CVector> = problem
            .gradients(&x, &terms)
            .into_iter()
            .map(|mut g| {
                if normal_sq > 0.0 {
                    let along = normal.dotc(&g).re / normal_sq;
                    g.axpy(C64::from(-along), &normal, C64::from(1.0));
                }
                g
            })
            .collect();
        let mut directions = vec![tangent[0].clone()];
        if tangent.len() > 1 {
            directions.push(min_norm_combination(&tangent));
        }
        let mut accepted: Option<(CVector, Vec<f64>, f64)> = None;
        for direction in &directions {
            let dnorm = direction.norm();
            if !(dnorm > 0.0) || !dnorm.is_finite() {
                continue;
            }
            let mut scale = step * x.norm() / dnorm;
            for _ in 0..=MAX_HALVINGS {
                let mut candidate = x.clone();
                candidate.axpy(C64::from(scale), direction, C64::from(1.0));
                problem.project(&mut candidate);
                let candidate_values = problem.values(&candidate);
                let (candidate_value, _) = min_with_index(candidate_values.iter().copied());
                if candidate_value > value {
                    if accepted.as_ref().is_none_or(|a| candidate_value > a.2) {
                        accepted = Some((candidate, candidate_values, candidate_value));
                    }
                    break;
                }
                scale *= 0.5;
            }
        }
        let Some((candidate, candidate_values, candidate_value)) = accepted else {
            // No improving step down to the smallest trial: later iterations
            // would retry the same directions from the same point.
            break;
        };
        x = candidate;
        values = candidate_values;
        value = candidate_value;
        if value > best_value {
            best_value = value;
            best.copy_from(&x);
        }
        trace.push(TracePoint {
            iteration: l,
            objective: value,
            best_objective: best_value,
        });
        if best_value > reference * (1.0 + settings.stall_tolerance) {
            reference = best_value;
            last_gain_iteration = l;
        } else if l - last_gain_iteration >= settings.stall_window {
            break;
        }
    }
    PsaOutcome {
        best,
        best_value,
        trace,
    }
}

/// Writes `iteration,objective,best_objective` rows.
pub fn write_trace_csv(trace: &[TracePoint], path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(file, "iteration,objective,best_objective").map_err(io)?;
    for p in trace {
        writeln!(file, "{},{:.9e},{:.9e}", p.iteration, p.objective, p.best_objective).map_err(io)?;
    }
    file.flush().map_err(io)
}
