//! System configuration, user drops and Rayleigh channel generation.
//!
//! Every random quantity is drawn from a ChaCha stream selected by
//! `(master seed, purpose, indices)`, so a drop or a channel realization can
//! be regenerated in isolation and in any order.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn default_exponent() -> f64 {
    3.0
}
fn default_boundary_snr_db() -> f64 {
    -5.0
}
fn default_min_distance() -> f64 {
    0.02
}
fn default_max_distance() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub num_antennas: usize,
    pub num_groups: usize,
    pub users_per_group: Vec<usize>,
    /// Linear watts.
    pub power_budget: f64,
    /// Linear watts.
    pub noise_variance: f64,
    /// km.
    pub cell_radius: f64,
    #[serde(default = "default_exponent")]
    pub pathloss_exponent: f64,
    #[serde(default = "default_boundary_snr_db")]
    pub boundary_snr_db: f64,
    #[serde(default = "default_min_distance")]
    pub min_distance: f64,
    #[serde(default = "default_max_distance")]
    pub max_distance: f64,
    #[serde(default)]
    pub rng_seed: u64,
}

impl SystemConfig {
    /// Homogeneous groups with the reference cell setup: P/σ² = 10 dB,
    /// σ² = 1, 1 km radius, −5 dB boundary SNR.
    pub fn uniform(num_antennas: usize, num_groups: usize, users: usize, seed: u64) -> Self {
        SystemConfig {
            num_antennas,
            num_groups,
            users_per_group: vec![users; num_groups],
            power_budget: 10.0,
            noise_variance: 1.0,
            cell_radius: 1.0,
            pathloss_exponent: default_exponent(),
            boundary_snr_db: default_boundary_snr_db(),
            min_distance: default_min_distance(),
            max_distance: default_max_distance(),
            rng_seed: seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.num_antennas == 0 {
            return fail("num_antennas must be at least 1".into());
        }
        if self.num_groups == 0 {
            return fail("num_groups must be at least 1".into());
        }
        if self.users_per_group.len() != self.num_groups {
            return fail(format!(
                "users_per_group has {} entries but num_groups is {}",
                self.users_per_group.len(),
                self.num_groups
            ));
        }
        if let Some(g) = self.users_per_group.iter().position(|&k| k == 0) {
            return fail(format!("group {g} has no users"));
        }
        if !(self.power_budget > 0.0 && self.power_budget.is_finite()) {
            return fail(format!("power_budget must be positive, got {}", self.power_budget));
        }
        if !(self.noise_variance > 0.0 && self.noise_variance.is_finite()) {
            return fail(format!(
                "noise_variance must be positive, got {}",
                self.noise_variance
            ));
        }
        if !self.pathloss_exponent.is_finite() || !self.boundary_snr_db.is_finite() {
            return fail("pathloss_exponent and boundary_snr_db must be finite".into());
        }
        if !(0.0 < self.min_distance
            && self.min_distance <= self.max_distance
            && self.max_distance <= self.cell_radius)
        {
            return fail(format!(
                "need 0 < min_distance ({}) <= max_distance ({}) <= cell_radius ({})",
                self.min_distance, self.max_distance, self.cell_radius
            ));
        }
        Ok(())
    }

    pub fn total_users(&self) -> usize {
        self.users_per_group.iter().sum()
    }

    pub fn snr(&self) -> f64 {
        self.power_budget / self.noise_variance
    }
}

/// `ξ_o · d^(−exponent)`.
pub fn pathloss_variance(distance: f64, constant: f64, exponent: f64) -> Result<f64> {
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(Error::domain(format!("distance must be positive, got {distance}")));
    }
    if !(constant > 0.0) || !constant.is_finite() {
        return Err(Error::domain(format!(
            "pathloss constant must be positive, got {constant}"
        )));
    }
    Ok(constant * distance.powf(-exponent))
}

/// Pathloss constant that puts the single-antenna, unit-power SNR at the
/// cell edge at `boundary_snr_db`.
pub fn calibrate_pathloss_constant(config: &SystemConfig) -> Result<f64> {
    config.validate()?;
    Ok(config.noise_variance
        * db_to_linear(config.boundary_snr_db)
        * config.cell_radius.powf(config.pathloss_exponent))
}

/// What a random stream is used for. Each purpose gets disjoint ChaCha streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamPurpose {
    Drop,
    Channel,
    Scheduler,
}

impl StreamPurpose {
    fn tag(self) -> u64 {
        match self {
            StreamPurpose::Drop => 0x6472_6f70,
            StreamPurpose::Channel => 0x6368_616e,
            StreamPurpose::Scheduler => 0x7363_6864,
        }
    }
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a sequence of words.
pub fn mix_words(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x243F_6A88_85A3_08D3, |acc, &w| splitmix64(acc ^ splitmix64(w)))
}

/// Independent, reproducible generator for `(seed, purpose, indices)`.
pub fn substream(seed: u64, purpose: StreamPurpose, indices: &[u64]) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut words = Vec::with_capacity(indices.len() + 1);
    words.push(purpose.tag());
    words.extend_from_slice(indices);
    rng.set_stream(mix_words(&words));
    rng
}

/// Distances for one drop of users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserDrop {
    /// km, indexed `[group][user]`.
    pub distances: Vec<Vec<f64>>,
    pub pathloss_constant: f64,
    pub pathloss_exponent: f64,
}

impl UserDrop {
    pub fn variances(&self) -> Result<Vec<Vec<f64>>> {
        self.distances
            .iter()
            .map(|group| {
                group
                    .iter()
                    .map(|&d| pathloss_variance(d, self.pathloss_constant, self.pathloss_exponent))
                    .collect()
            })
            .collect()
    }
}

pub fn generate_drop<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> Result<UserDrop> {
    config.validate()?;
    let (lo, hi) = (config.min_distance, config.max_distance);
    let distances = config
        .users_per_group
        .iter()
        .map(|&k| {
            (0..k)
                .map(|_| if lo == hi { lo } else { rng.random_range(lo..=hi) })
                .collect()
        })
        .collect();
    Ok(UserDrop {
        distances,
        pathloss_constant: calibrate_pathloss_constant(config)?,
        pathloss_exponent: config.pathloss_exponent,
    })
}

/// Drop `drop_index` of the configuration's seed.
pub fn drop_for(config: &SystemConfig, drop_index: u64) -> Result<UserDrop> {
    let mut rng = substream(config.rng_seed, StreamPurpose::Drop, &[drop_index]);
    generate_drop(config, &mut rng)
}

/// One circularly-symmetric complex Gaussian sample with unit variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Channels of one multicast group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupChannels {
    normalized: CMatrix,
    variances: Vec<f64>,
    channels: CMatrix,
}

impl GroupChannels {
    /// Builds `h_k = √β_k g_k` column by column.
    pub fn new(normalized: CMatrix, variances: Vec<f64>) -> Result<Self> {
        if normalized.ncols() != variances.len() {
            return Err(Error::domain(format!(
                "{} channel columns but {} variances",
                normalized.ncols(),
                variances.len()
            )));
        }
        if normalized.ncols() == 0 || normalized.nrows() == 0 {
            return Err(Error::domain("group needs at least one user and one antenna"));
        }
        if let Some(k) = variances.iter().position(|&b| !(b > 0.0 && b.is_finite())) {
            return Err(Error::domain(format!(
                "user {k}: channel variance must be positive and finite"
            )));
        }
        let mut channels = normalized.clone();
        for (k, mut col) in channels.column_iter_mut().enumerate() {
            let scale = variances[k].sqrt();
            for z in col.iter_mut() {
                *z *= scale;
            }
        }
        for (k, col) in channels.column_iter().enumerate() {
            if col.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::domain(format!("user {k}: non-finite channel entry")));
            }
            if col.norm() == 0.0 {
                return Err(Error::domain(format!("user {k}: all-zero channel")));
            }
        }
        Ok(GroupChannels {
            normalized,
            variances,
            channels,
        })
    }

    /// Group made from raw channels with unit variances (`g = h`).
    pub fn from_channels(channels: CMatrix) -> Result<Self> {
        let k = channels.ncols();
        GroupChannels::new(channels, vec![1.0; k])
    }

    pub fn num_users(&self) -> usize {
        self.variances.len()
    }

    pub fn num_antennas(&self) -> usize {
        self.channels.nrows()
    }

    /// `H_i`, one column per user.
    pub fn channels(&self) -> &CMatrix {
        &self.channels
    }

    pub fn normalized(&self) -> &CMatrix {
        &self.normalized
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelSetJson", into = "ChannelSetJson")]
pub struct ChannelSet {
    num_antennas: usize,
    groups: Vec<GroupChannels>,
}

impl ChannelSet {
    pub fn new(groups: Vec<GroupChannels>) -> Result<Self> {
        let first = groups
            .first()
            .ok_or_else(|| Error::domain("channel set needs at least one group"))?;
        let n = first.num_antennas();
        if let Some(i) = groups.iter().position(|g| g.num_antennas() != n) {
            return Err(Error::domain(format!(
                "group {i} has {} antennas, expected {n}",
                groups[i].num_antennas()
            )));
        }
        Ok(ChannelSet {
            num_antennas: n,
            groups,
        })
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group(&self, i: usize) -> &GroupChannels {
        &self.groups[i]
    }

    pub fn groups(&self) -> &[GroupChannels] {
        &self.groups
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn generate_channels<R: Rng + ?Sized>(
    drop: &UserDrop,
    config: &SystemConfig,
    rng: &mut R,
) -> Result<ChannelSet> {
    config.validate()?;
    let variances = drop.variances()?;
    if variances.len() != config.num_groups {
        return Err(Error::domain("drop does not match the configured group count"));
    }
    let n = config.num_antennas;
    let groups = variances
        .into_iter()
        .map(|beta| {
            let k = beta.len();
            let g = CMatrix::from_fn(n, k, |_, _| complex_gaussian(rng));
            GroupChannels::new(g, beta)
        })
        .collect::<Result<Vec<_>>>()?;
    ChannelSet::new(groups)
}

/// Channel realization `realization` of drop `drop_index`.
pub fn channels_for(
    config: &SystemConfig,
    drop: &UserDrop,
    drop_index: u64,
    realization: u64,
) -> Result<ChannelSet> {
    let mut rng = substream(
        config.rng_seed,
        StreamPurpose::Channel,
        &[drop_index, realization, config.num_antennas as u64],
    );
    generate_channels(drop, config, &mut rng)
}

#[derive(Serialize, Deserialize)]
struct GroupJson {
    variances: Vec<f64>,
    /// One entry per user, each a list of `[re, im]` pairs.
    normalized: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct ChannelSetJson {
    num_antennas: usize,
    groups: Vec<GroupJson>,
}

impl From<ChannelSet> for ChannelSetJson {
    fn from(set: ChannelSet) -> Self {
        ChannelSetJson {
            num_antennas: set.num_antennas,
            groups: set
                .groups
                .iter()
                .map(|g| GroupJson {
                    variances: g.variances.clone(),
                    normalized: g
                        .normalized
                        .column_iter()
                        .map(|col| col.iter().map(|z| [z.re, z.im]).collect())
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<ChannelSetJson> for ChannelSet {
    type Error = Error;

    fn try_from(raw: ChannelSetJson) -> Result<Self> {
        let n = raw.num_antennas;
        let groups = raw
            .groups
            .into_iter()
            .enumerate()
            .map(|(i, g)| {
                if let Some(bad) = g.normalized.iter().position(|col| col.len() != n) {
                    return Err(Error::domain(format!(
                        "group {i} user {bad}: expected {n} entries"
                    )));
                }
                let k = g.normalized.len();
                let m = CMatrix::from_fn(n, k, |row, col| {
                    let [re, im] = g.normalized[col][row];
                    C64::new(re, im)
                });
                GroupChannels::new(m, g.variances).map_err(|e| e.in_group(i))
            })
            .collect::<Result<Vec<_>>>()?;
        ChannelSet::new(groups)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pathloss_examples() {
        let xi = 10f64.powf(-0.5);
        assert_relative_eq!(pathloss_variance(1.0, xi, 3.0).unwrap(), 0.316_227_766, epsilon = 1e-9);
        assert_relative_eq!(pathloss_variance(0.5, xi, 3.0).unwrap(), 8.0 * xi, max_relative = 1e-14);
        assert_eq!(pathloss_variance(1.0, 1.0, 0.0).unwrap(), 1.0);
        assert!(pathloss_variance(0.0, 1.0, 3.0).is_err());
        assert!(pathloss_variance(1.0, -1.0, 3.0).is_err());
    }

    #[test]
    fn calibration_examples() {
        let mut cfg = SystemConfig::uniform(4, 2, 2, 0);
        cfg.noise_variance = 1.0;
        assert_relative_eq!(
            calibrate_pathloss_constant(&cfg).unwrap(),
            10f64.powf(-0.5),
            max_relative = 1e-14
        );
        cfg.boundary_snr_db = 0.0;
        assert_relative_eq!(calibrate_pathloss_constant(&cfg).unwrap(), 1.0, max_relative = 1e-14);
        cfg.boundary_snr_db = -5.0;
        cfg.cell_radius = 2.0;
        assert_relative_eq!(
            calibrate_pathloss_constant(&cfg).unwrap(),
            8.0 * 10f64.powf(-0.5),
            max_relative = 1e-14
        );
    }

    #[test]
    fn boundary_snr_round_trip() {
        for (radius, snr_db, noise) in [(1.0, -5.0, 1.0), (2.5, 3.0, 0.1), (0.7, -12.0, 4.0)] {
            let mut cfg = SystemConfig::uniform(2, 1, 1, 0);
            cfg.cell_radius = radius;
            cfg.max_distance = radius;
            cfg.boundary_snr_db = snr_db;
            cfg.noise_variance = noise;
            let xi = calibrate_pathloss_constant(&cfg).unwrap();
            let beta = pathloss_variance(radius, xi, cfg.pathloss_exponent).unwrap();
            assert_relative_eq!(beta / noise, db_to_linear(snr_db), max_relative = 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = SystemConfig::uniform(4, 3, 2, 0);
        assert!(cfg.validate().is_ok());
        cfg.users_per_group = vec![2, 0, 1];
        assert!(cfg.validate().is_err());
        let mut cfg = SystemConfig::uniform(4, 3, 2, 0);
        cfg.max_distance = 2.0;
        assert!(cfg.validate().is_err());
        let mut cfg = SystemConfig::uniform(4, 3, 2, 0);
        cfg.users_per_group.pop();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn drop_is_deterministic_and_bounded() {
        let cfg = SystemConfig::uniform(4, 5, 3, 42);
        let a = drop_for(&cfg, 0).unwrap();
        let b = drop_for(&cfg, 0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, drop_for(&cfg, 1).unwrap());
        for d in a.distances.iter().flatten() {
            assert!((cfg.min_distance..=cfg.max_distance).contains(d));
        }
    }

    #[test]
    fn degenerate_distance_interval() {
        let mut cfg = SystemConfig::uniform(4, 3, 2, 1);
        cfg.min_distance = 0.5;
        cfg.max_distance = 0.5;
        let drop = drop_for(&cfg, 3).unwrap();
        assert!(drop.distances.iter().flatten().all(|&d| d == 0.5));
    }

    #[test]
    fn drop_mean_matches_uniform_law() {
        let cfg = SystemConfig::uniform(1, 100, 100, 7);
        let drop = drop_for(&cfg, 0).unwrap();
        let samples: Vec<f64> = drop.distances.into_iter().flatten().collect();
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let width = cfg.max_distance - cfg.min_distance;
        let std_err = width / 12f64.sqrt() / n.sqrt();
        let expected = 0.5 * (cfg.min_distance + cfg.max_distance);
        assert!((mean - expected).abs() < 3.0 * std_err, "mean {mean}");
    }

    #[test]
    fn channels_are_deterministic_and_scaled() {
        let cfg = SystemConfig::uniform(8, 3, 4, 9);
        let drop = drop_for(&cfg, 2).unwrap();
        let a = channels_for(&cfg, &drop, 2, 5).unwrap();
        let b = channels_for(&cfg, &drop, 2, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, channels_for(&cfg, &drop, 2, 6).unwrap());
        for g in a.groups() {
            for k in 0..g.num_users() {
                let expect = g.normalized().column(k) * C64::from(g.variances()[k].sqrt());
                assert_eq!(g.channels().column(k), expect.column(0));
            }
        }
    }

    #[test]
    fn unit_variance_fading() {
        let cfg = SystemConfig::uniform(100, 1, 100, 3);
        let drop = drop_for(&cfg, 0).unwrap();
        let set = channels_for(&cfg, &drop, 0, 0).unwrap();
        let g = set.group(0).normalized();
        let power = g.iter().map(|z| z.norm_sqr()).sum::<f64>() / g.len() as f64;
        assert!((power - 1.0).abs() < 0.05, "E|g|^2 = {power}");
    }

    #[test]
    fn variance_scaling_identity() {
        let g = CMatrix::from_fn(3, 1, |r, _| C64::new(r as f64 + 1.0, -0.5));
        let group = GroupChannels::new(g.clone(), vec![4.0]).unwrap();
        assert_relative_eq!(group.channels().norm(), 2.0 * g.norm(), max_relative = 1e-15);
    }

    #[test]
    fn rejects_zero_channel() {
        let g = CMatrix::zeros(3, 1);
        assert!(GroupChannels::new(g, vec![1.0]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let cfg = SystemConfig::uniform(3, 2, 2, 11);
        let drop = drop_for(&cfg, 0).unwrap();
        let set = channels_for(&cfg, &drop, 0, 0).unwrap();
        let text = set.to_json().unwrap();
        assert_eq!(ChannelSet::from_json(&text).unwrap(), set);
        let config_text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<SystemConfig>(&config_text).unwrap(), cfg);
    }
}
