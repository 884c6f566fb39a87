//! Brute-force reference solvers shared by the integration tests. They use
//! only nalgebra's dense inverse and plain loops, never the library solvers.

#![allow(dead_code)]

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use groupcast::{ChannelSet, GroupChannels};

pub type C = Complex<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> C {
    // Box-Muller, per-component variance 1/2
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let r = (-u1.ln()).sqrt();
    C::from_polar(r, TAU * u2)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<C> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Group with random normalized channels and variances in `[lo, hi]`.
pub fn random_group(rng: &mut ChaCha8Rng, n: usize, k: usize, lo: f64, hi: f64) -> GroupChannels {
    let g = random_matrix(rng, n, k);
    let betas = (0..k).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect();
    GroupChannels::new(g, betas).unwrap()
}

/// Single-group gain matrix `A = Xᴴ H` and power metric `M = Xᴴ X` for
/// `X = R̃⁻¹ H`, built with an explicit inverse.
pub fn single_group_forms(group: &GroupChannels, power: f64, noise: f64) -> (DMatrix<C>, DMatrix<C>) {
    let n = group.num_antennas();
    let k = group.num_users();
    let betas = group.variances();
    let harmonic = k as f64 / betas.iter().map(|b| 1.0 / b).sum::<f64>();
    let g = group.normalized();
    let scale = power * harmonic / (noise * k as f64);
    let r = DMatrix::<C>::identity(n, n) + g * g.adjoint() * C::from(scale);
    let x = r.try_inverse().unwrap() * group.channels();
    (x.adjoint() * group.channels(), x.adjoint() * &x)
}

/// Dense grid over `a = (r, (1−r)e^{jφ})` scaled onto `aᴴ M a = P`; returns
/// the best `min_k |(A a)_k|²`.
pub fn two_user_grid_oracle(a_mat: &DMatrix<C>, m_mat: &DMatrix<C>, power: f64) -> f64 {
    assert_eq!(a_mat.ncols(), 2);
    let mut best = 0.0f64;
    for ri in 0..=1000 {
        let r = ri as f64 * 1e-3;
        for pi in 0..1000 {
            let phase = C::from_polar(1.0, TAU * pi as f64 * 1e-3);
            let a = DVector::from_vec(vec![C::from(r), phase * (1.0 - r)]);
            let p = a.dotc(&(m_mat * &a)).re;
            if p <= 0.0 {
                continue;
            }
            let y = a_mat * &a;
            let gain = y[0].norm_sqr().min(y[1].norm_sqr()) * power / p;
            best = best.max(gain);
        }
    }
    best
}

fn sinr_pair(h: [&DVector<C>; 2], w: [&DVector<C>; 2], noise: f64) -> [f64; 2] {
    let s = |i: usize, j: usize| w[j].dotc(h[i]).norm_sqr();
    [s(0, 0) / (s(0, 1) + noise), s(1, 1) / (s(1, 0) + noise)]
}

/// Max-min SINR for two single-user groups. Scans the dual weight split of
/// the regularized beamformer family `(σ²I + Σ μ_j h_j h_jᴴ)⁻¹ h_i` with
/// `μ_1 + μ_2 = P` and, for each pair of directions, equalizes the two SINRs
/// by bisection on the power split.
pub fn two_group_grid_oracle(h: [&DVector<C>; 2], power: f64, noise: f64, points: usize) -> f64 {
    let n = h[0].len();
    let mut best = 0.0f64;
    for s in 0..=points {
        let mu1 = power * s as f64 / points as f64;
        let mu2 = power - mu1;
        let r = DMatrix::<C>::identity(n, n) * C::from(noise)
            + h[0] * h[0].adjoint() * C::from(mu1)
            + h[1] * h[1].adjoint() * C::from(mu2);
        let inv = r.try_inverse().unwrap();
        let d1 = (&inv * h[0]).normalize();
        let d2 = (&inv * h[1]).normalize();
        let sinr_at = |p1: f64| {
            let w1 = &d1 * C::from(p1.sqrt());
            let w2 = &d2 * C::from((power - p1).max(0.0).sqrt());
            sinr_pair(h, [&w1, &w2], noise)
        };
        let (mut lo, mut hi) = (0.0, power);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            let v = sinr_at(mid);
            if v[0] < v[1] {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let v = sinr_at(0.5 * (lo + hi));
        best = best.max(v[0].min(v[1]));
    }
    best
}

/// Exhaustive search over the directions and power split for `N = 2`.
/// Each unit direction in C² is `(cos θ, sin θ e^{jφ})` up to a common phase
/// that does not affect the SINR.
pub fn two_group_exhaustive(h: [&DVector<C>; 2], power: f64, noise: f64, steps: usize) -> f64 {
    let dirs: Vec<DVector<C>> = (0..=steps)
        .flat_map(|ti| {
            let theta = std::f64::consts::FRAC_PI_2 * ti as f64 / steps as f64;
            (0..2 * steps).map(move |pi| {
                let phi = TAU * pi as f64 / (2 * steps) as f64;
                DVector::from_vec(vec![C::from(theta.cos()), C::from_polar(theta.sin(), phi)])
            })
        })
        .collect();
    let gains: Vec<[f64; 2]> = dirs
        .iter()
        .map(|d| [d.dotc(h[0]).norm_sqr(), d.dotc(h[1]).norm_sqr()])
        .collect();
    let mut best = 0.0f64;
    for g1 in &gains {
        for g2 in &gains {
            // SINR_1 = p1 a / (p2 b + σ²), SINR_2 = p2 c / (p1 d + σ²)
            let (a, d) = (g1[0], g1[1]);
            let (c, b) = (g2[1], g2[0]);
            let (mut lo, mut hi) = (0.0, power);
            for _ in 0..60 {
                let p1 = 0.5 * (lo + hi);
                let p2 = power - p1;
                if p1 * a / (p2 * b + noise) < p2 * c / (p1 * d + noise) {
                    lo = p1;
                } else {
                    hi = p1;
                }
            }
            let p1 = 0.5 * (lo + hi);
            let p2 = power - p1;
            best = best.max((p1 * a / (p2 * b + noise)).min(p2 * c / (p1 * d + noise)));
        }
    }
    best
}

pub fn channel_set(groups: Vec<GroupChannels>) -> ChannelSet {
    ChannelSet::new(groups).unwrap()
}
