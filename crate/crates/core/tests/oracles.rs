//! Solver results against independent brute-force references.

mod common;

use common::*;
use groupcast::numerics::abs_cosine;
use groupcast::{approx_cov_single, psa_mmf_slot, psa_single_group, GroupChannels, PsaSettings};
use nalgebra::DVector;

const P: f64 = 10.0;
const NOISE: f64 = 1.0;

#[test]
fn single_user_group_matches_matched_filter() {
    let mut rng = rng(11);
    for _ in 0..50 {
        let n = 2 + (rng_index(&mut rng, 7));
        let group = random_group(&mut rng, n, 1, 0.5, 5.0);
        let cov = approx_cov_single(&group, P, NOISE).unwrap();
        let d = psa_single_group(0, &group, &cov, P, &PsaSettings::default()).unwrap();
        let h = group.channels().column(0).into_owned();
        assert!(abs_cosine(&d.direction, &h) >= 1.0 - 1e-6);

        let slot = psa_mmf_slot(0, &channel_set(vec![group.clone()]), &[0], P, NOISE, &PsaSettings::default()).unwrap();
        let expected = P * h.norm_squared() / NOISE;
        assert!((slot.min_sinr() - expected).abs() <= 1e-6 * expected);
    }
}

fn rng_index(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> usize {
    use rand::Rng;
    rng.random_range(0..n)
}

#[test]
fn two_user_group_reaches_grid_optimum() {
    let mut rng = rng(12);
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let n = 2 + rng_index(&mut rng, 3);
        let group = random_group(&mut rng, n, 2, 0.5, 5.0);
        let (a, m) = single_group_forms(&group, P, NOISE);
        let oracle = two_user_grid_oracle(&a, &m, P);
        let cov = approx_cov_single(&group, P, NOISE).unwrap();
        let d = psa_single_group(0, &group, &cov, P, &PsaSettings::default()).unwrap();
        worst = worst.min((d.min_gain - oracle) / oracle);
    }
    eprintln!("worst relative gap {worst:e}");
    assert!(worst >= -1e-3, "worst relative gap {worst}");
}

#[test]
fn orthogonal_equal_norm_pair_matches_grid() {
    let mut g = nalgebra::DMatrix::<C>::zeros(4, 2);
    g[(0, 0)] = C::new(1.0, 0.0);
    g[(1, 1)] = C::new(0.0, 1.0);
    let group = GroupChannels::new(g, vec![1.0, 1.0]).unwrap();
    let (a, m) = single_group_forms(&group, P, NOISE);
    let oracle = two_user_grid_oracle(&a, &m, P);
    let cov = approx_cov_single(&group, P, NOISE).unwrap();
    let d = psa_single_group(0, &group, &cov, P, &PsaSettings::default()).unwrap();
    assert!((d.min_gain - oracle).abs() <= 1e-3 * oracle, "{} vs {oracle}", d.min_gain);
}

#[test]
fn two_group_oracles_agree() {
    let mut rng = rng(13);
    for _ in 0..3 {
        let h0 = DVector::from_fn(2, |_, _| gaussian(&mut rng));
        let h1 = DVector::from_fn(2, |_, _| gaussian(&mut rng));
        let family = two_group_grid_oracle([&h0, &h1], P, NOISE, 2000);
        let exhaustive = two_group_exhaustive([&h0, &h1], P, NOISE, 30);
        assert!(family >= exhaustive * (1.0 - 1e-9), "{family} < {exhaustive}");
        assert!(family <= exhaustive * 1.05, "{family} far above {exhaustive}");
    }
}

#[test]
fn two_single_user_groups_reach_grid_optimum() {
    let mut rng = rng(14);
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let groups: Vec<GroupChannels> = (0..2).map(|_| random_group(&mut rng, 2, 1, 0.5, 5.0)).collect();
        let h0 = groups[0].channels().column(0).into_owned();
        let h1 = groups[1].channels().column(0).into_owned();
        let oracle = two_group_grid_oracle([&h0, &h1], P, NOISE, 2000);
        let slot = psa_mmf_slot(0, &channel_set(groups), &[0, 1], P, NOISE, &PsaSettings::default()).unwrap();
        worst = worst.min((slot.min_sinr() - oracle) / oracle);
    }
    eprintln!("worst relative gap {worst:e}");
    assert!(worst >= -1e-2, "worst relative gap {worst}");
}
