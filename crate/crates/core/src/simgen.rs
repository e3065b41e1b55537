//! Synthetic MCS traces.
//!
//! [`generate_scenario`] produces per-user sequences driven by the two
//! mechanisms that make reported MCS values go stale between feedback
//! instants: Doppler-correlated fading on every link, and interferers that
//! switch on and off. Each link gain is a unit-power complex AR(1) process
//! with per-feedback-step correlation `rho`; under partial loading every
//! interferer toggles with geometric holding times, under full loading all
//! interferers stay on. The SINR is quantised to an MCS index by counting the
//! thresholds it exceeds.
//!
//! [`generate_markov`] samples exact finite-order Markov chains, used as
//! sources with known statistics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Symbol, Trace, DEFAULT_ALPHABET_SIZE, DEFAULT_DELTA};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loading {
    Full,
    Partial,
}

impl std::str::FromStr for Loading {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Loading::Full),
            "partial" => Ok(Loading::Partial),
            other => Err(Error::domain(format!("unknown loading `{other}` (expected full or partial)"))),
        }
    }
}

impl std::fmt::Display for Loading {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Loading::Full => "full",
            Loading::Partial => "partial",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub loading: Loading,
    pub users: usize,
    pub seq_len: usize,
    /// Per-feedback-step correlation of every complex link gain.
    pub rho: f64,
    pub interferers: usize,
    /// Mean on/off holding time of an interferer, in feedback steps.
    pub mean_holding_steps: f64,
    /// Increasing SINR thresholds in dB; `p - 1` of them for `p` MCS levels.
    pub thresholds_db: Vec<f64>,
    /// Range of per-user mean desired-signal-to-noise ratio, dB.
    pub desired_db: (f64, f64),
    /// Range of per-interferer mean interference-to-noise ratio, dB.
    pub interferer_db: (f64, f64),
    /// Independent fading branches whose powers are averaged per link, as a
    /// wideband quality report averages over frequency-selective subbands.
    pub diversity: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            loading: Loading::Partial,
            users: 210,
            seq_len: 1000,
            rho: 0.9,
            interferers: 8,
            mean_holding_steps: 10.0,
            thresholds_db: default_thresholds_db(DEFAULT_ALPHABET_SIZE),
            desired_db: (5.0, 30.0),
            interferer_db: (-5.0, 20.0),
            diversity: 16,
            seed: 1,
        }
    }
}

/// `p - 1` thresholds uniformly spaced from -6 dB to 20 dB.
pub fn default_thresholds_db(p: usize) -> Vec<f64> {
    let n = p.saturating_sub(1);
    match n {
        0 => Vec::new(),
        1 => vec![7.0],
        _ => (0..n).map(|i| -6.0 + 26.0 * i as f64 / (n - 1) as f64).collect(),
    }
}

impl ScenarioConfig {
    pub fn with_loading(loading: Loading) -> Self {
        Self { loading, ..Self::default() }
    }

    pub fn alphabet(&self) -> Result<Alphabet> {
        Alphabet::new(self.thresholds_db.len() + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.thresholds_db.is_empty() {
            return Err(Error::domain("at least one SINR threshold is required"));
        }
        if self.thresholds_db.iter().any(|t| !t.is_finite()) || self.thresholds_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("SINR thresholds must be finite and strictly increasing"));
        }
        self.alphabet()?;
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::domain(format!("rho must lie in (0, 1), got {}", self.rho)));
        }
        if !(self.mean_holding_steps >= 1.0) {
            return Err(Error::domain("mean holding time must be at least one step"));
        }
        if self.diversity == 0 {
            return Err(Error::domain("diversity must be at least 1"));
        }
        for (lo, hi) in [self.desired_db, self.interferer_db] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::domain(format!("invalid dB range ({lo}, {hi})")));
            }
        }
        Ok(())
    }
}

/// MCS index for an SINR: the number of thresholds strictly below it.
pub fn sinr_to_mcs(sinr_db: f64, thresholds_db: &[f64]) -> Symbol {
    thresholds_db.partition_point(|&t| t < sinr_db) as Symbol
}

/// Seed for one user's stream, derived from the master seed and the user id.
pub fn user_seed(master: u64, user_id: &str) -> u64 {
    // FNV-1a over the id, then a splitmix64 finaliser over both.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in user_id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = master ^ h.rotate_left(17);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn user_id(index: usize) -> String {
    format!("u{index:03}")
}

/// Unit-power complex AR(1) fading, averaged over independent branches.
#[derive(Debug, Clone)]
struct Link {
    branches: Vec<(f64, f64)>,
    mean_power: f64,
}

impl Link {
    fn new(rng: &mut ChaCha8Rng, branches: usize, mean_power: f64) -> Self {
        let branches = (0..branches).map(|_| cn(rng)).collect();
        Self { branches, mean_power }
    }

    fn power(&self) -> f64 {
        let g: f64 = self.branches.iter().map(|(re, im)| re * re + im * im).sum();
        self.mean_power * g / self.branches.len() as f64
    }

    fn step(&mut self, rng: &mut ChaCha8Rng, rho: f64) {
        let innov = (1.0 - rho * rho).sqrt();
        for b in &mut self.branches {
            let (wr, wi) = cn(rng);
            *b = (rho * b.0 + innov * wr, rho * b.1 + innov * wi);
        }
    }
}

/// Circularly symmetric complex normal with unit variance.
fn cn(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (s * rng.sample::<f64, _>(StandardNormal), s * rng.sample::<f64, _>(StandardNormal))
}

fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// One trace per user, ids `u000`, `u001`, ... Deterministic given the seed;
/// each user draws from its own stream.
pub fn generate_scenario(cfg: &ScenarioConfig) -> Result<Vec<Trace>> {
    cfg.validate()?;
    Ok((0..cfg.users).map(|u| generate_user(cfg, &user_id(u))).collect())
}

/// The trace of a single user of the scenario.
pub fn generate_user(cfg: &ScenarioConfig, id: &str) -> Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(user_seed(cfg.seed, id));
    let desired_db = rng.random_range(cfg.desired_db.0..=cfg.desired_db.1);
    let mut desired = Link::new(&mut rng, cfg.diversity, db_to_lin(desired_db));
    let mut interferers: Vec<(Link, bool)> = (0..cfg.interferers)
        .map(|_| {
            let db = rng.random_range(cfg.interferer_db.0..=cfg.interferer_db.1);
            let link = Link::new(&mut rng, cfg.diversity, db_to_lin(db));
            let on = match cfg.loading {
                Loading::Full => true,
                Loading::Partial => rng.random_bool(0.5),
            };
            (link, on)
        })
        .collect();
    let switch_p = 1.0 / cfg.mean_holding_steps;

    let mut samples = Vec::with_capacity(cfg.seq_len);
    for t in 0..cfg.seq_len {
        let interference: f64 = interferers.iter().filter(|(_, on)| *on).map(|(l, _)| l.power()).sum();
        let sinr = desired.power() / (interference + 1.0);
        samples.push((t as u64, sinr_to_mcs(10.0 * sinr.log10(), &cfg.thresholds_db)));

        desired.step(&mut rng, cfg.rho);
        for (link, on) in &mut interferers {
            link.step(&mut rng, cfg.rho);
            if cfg.loading == Loading::Partial && rng.random_bool(switch_p) {
                *on = !*on;
            }
        }
    }
    Trace { user_id: id.to_string(), samples, delta: DEFAULT_DELTA }
}

/// An order-`order` Markov chain over `0..alphabet_size`.
///
/// Row `r` of `transitions` is the next-symbol distribution after the context
/// whose base-`alphabet_size` digits (oldest most significant) spell `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovSourceConfig {
    pub alphabet_size: usize,
    pub order: usize,
    pub transitions: Vec<Vec<f64>>,
    /// Initial context of `order` symbols; drawn uniformly when absent.
    pub start: Option<Vec<Symbol>>,
    pub seed: u64,
}

impl MarkovSourceConfig {
    /// I.i.d. uniform symbols.
    pub fn uniform_iid(alphabet_size: usize, seed: u64) -> Self {
        Self {
            alphabet_size,
            order: 0,
            transitions: vec![vec![1.0 / alphabet_size as f64; alphabet_size]],
            start: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphabet_size < 1 {
            return Err(Error::domain("alphabet size must be positive"));
        }
        let rows = self.alphabet_size.checked_pow(self.order as u32).ok_or_else(|| Error::domain("too many contexts"))?;
        if self.transitions.len() != rows {
            return Err(Error::domain(format!("expected {rows} transition rows, got {}", self.transitions.len())));
        }
        for (i, row) in self.transitions.iter().enumerate() {
            if row.len() != self.alphabet_size {
                return Err(Error::domain(format!("row {i} has {} entries, expected {}", row.len(), self.alphabet_size)));
            }
            if row.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
                return Err(Error::domain(format!("row {i} has a negative or non-finite entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::domain(format!("row {i} sums to {s}, not 1")));
            }
        }
        if let Some(start) = &self.start {
            if start.len() != self.order || start.iter().any(|&s| s as usize >= self.alphabet_size) {
                return Err(Error::domain("start context must hold `order` valid symbols"));
            }
        }
        Ok(())
    }

    fn row_index(&self, context: &[Symbol]) -> usize {
        context.iter().fold(0, |acc, &s| acc * self.alphabet_size + s as usize)
    }
}

/// Samples `len` symbols from the chain. The start context is part of the
/// output when `len` allows.
pub fn generate_markov(cfg: &MarkovSourceConfig, user_id: &str, len: usize) -> Result<Trace> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut seq: Vec<Symbol> = match &cfg.start {
        Some(s) => s.clone(),
        None => (0..cfg.order).map(|_| rng.random_range(0..cfg.alphabet_size) as Symbol).collect(),
    };
    while seq.len() < len {
        let row = &cfg.transitions[cfg.row_index(&seq[seq.len() - cfg.order..])];
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut next = row.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        for (s, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                next = s;
                break;
            }
        }
        seq.push(next as Symbol);
    }
    seq.truncate(len);
    Ok(Trace::from_symbols(user_id, &seq))
}
