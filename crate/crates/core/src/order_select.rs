//! Model-order selection by penalised likelihood.
//!
//! Candidate orders `1..=k_opt` are scored with MDL, AIC and the
//! finite-sample corrected AICc. The likelihood of order `i` uses maximum
//! likelihood plug-in conditionals (raw counts, no blending) and the
//! parameter count is taken over the alphabet the user actually visited.
//!
//! An order-`i` chain over `m` symbols has `m^i` contexts with `m - 1` free
//! probabilities each, i.e. `n_params(m, i + 1)` in the `(m-1) m^(i-1)`
//! counting of `i`-symbol sequences. [`ParamCount::Chain`] uses that count;
//! [`ParamCount::Sequence`] pairs order `i` with `n_params(m, i)` instead,
//! which undercounts by a factor `m` and lets AICc overfit.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::alphabet::Symbol;
use crate::error::{Error, Result};
use crate::freq_tree::FrequencyTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Mdl,
    Aic,
    Aicc,
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mdl" => Ok(Criterion::Mdl),
            "aic" => Ok(Criterion::Aic),
            "aicc" => Ok(Criterion::Aicc),
            other => Err(Error::domain(format!("unknown criterion `{other}` (expected mdl, aic or aicc)"))),
        }
    }
}

/// Which positions enter the likelihood of each candidate order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    /// Order `i` is evaluated on every position that has `i` predecessors.
    #[default]
    Transitions,
    /// Every order is evaluated on the positions that have `k_opt`
    /// predecessors, so all candidates share the same `N`.
    CommonN,
}

impl std::str::FromStr for SampleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transitions" => Ok(SampleMode::Transitions),
            "common-n" => Ok(SampleMode::CommonN),
            other => Err(Error::domain(format!("unknown sample mode `{other}` (expected transitions or common-n)"))),
        }
    }
}

/// How many free parameters an order-`i` candidate is charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamCount {
    /// `(m - 1) m^i`: one free distribution per order-`i` context.
    #[default]
    Chain,
    /// `(m - 1) m^(i - 1)`.
    Sequence,
}

impl ParamCount {
    pub fn count(self, m: usize, order: usize) -> u64 {
        match self {
            ParamCount::Chain => n_params(m, order + 1),
            ParamCount::Sequence => n_params(m, order),
        }
    }
}

impl std::str::FromStr for ParamCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(ParamCount::Chain),
            "sequence" => Ok(ParamCount::Sequence),
            other => Err(Error::domain(format!("unknown parameter count `{other}` (expected chain or sequence)"))),
        }
    }
}

/// Log-likelihood (nats) of `seq[start..]` under the order-`order` maximum
/// likelihood chain fitted to those same positions, together with the number
/// of positions evaluated. `start` must be at least `order`.
pub fn sequence_loglik_from(seq: &[Symbol], order: usize, start: usize) -> Result<(f64, usize)> {
    if seq.len() < order + 1 {
        return Err(Error::domain(format!("order {order} needs at least {} symbols, got {}", order + 1, seq.len())));
    }
    if start < order || start >= seq.len() {
        return Err(Error::domain(format!("start {start} invalid for order {order} and length {}", seq.len())));
    }
    let mut joint: HashMap<&[Symbol], u64> = HashMap::new();
    let mut ctx: HashMap<&[Symbol], u64> = HashMap::new();
    for n in start..seq.len() {
        *joint.entry(&seq[n - order..=n]).or_insert(0) += 1;
        *ctx.entry(&seq[n - order..n]).or_insert(0) += 1;
    }
    // Summing per distinct n-gram keeps the result independent of position order.
    let mut terms: Vec<(&[Symbol], u64)> = joint.into_iter().collect();
    terms.sort_unstable();
    let ll = terms
        .iter()
        .map(|&(gram, c)| {
            let c = c as f64;
            c * (c / ctx[&gram[..order]] as f64).ln()
        })
        .sum();
    Ok((ll, seq.len() - start))
}

/// [`sequence_loglik_from`] over every position with `order` predecessors.
pub fn sequence_loglik(seq: &[Symbol], order: usize) -> Result<f64> {
    sequence_loglik_from(seq, order, order).map(|(ll, _)| ll)
}

/// `(m - 1) * m^(i - 1)`, saturating.
pub fn n_params(m: usize, i: usize) -> u64 {
    assert!(m >= 1 && i >= 1, "n_params needs m >= 1 and i >= 1");
    let m = m as u64;
    (m - 1).saturating_mul(m.saturating_pow((i - 1) as u32))
}

/// Scores of one candidate order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionRow {
    pub order: usize,
    pub loglik: f64,
    pub n_params: u64,
    pub n_samples: usize,
    pub mdl: f64,
    pub aic: f64,
    pub aicc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub rows: Vec<CriterionRow>,
    pub chosen_mdl: usize,
    pub chosen_aic: usize,
    pub chosen_aicc: usize,
}

impl CriterionReport {
    pub fn chosen(&self, c: Criterion) -> usize {
        match c {
            Criterion::Mdl => self.chosen_mdl,
            Criterion::Aic => self.chosen_aic,
            Criterion::Aicc => self.chosen_aicc,
        }
    }

    /// CSV rows `user_id,i,loglik,n_params,mdl,aic,aicc` (no header).
    pub fn to_csv_rows(&self, user_id: &str) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let _ = writeln!(out, "{user_id},{},{},{},{},{},{}", r.order, r.loglik, r.n_params, r.mdl, r.aic, r.aicc);
        }
        out
    }

    pub const CSV_HEADER: &'static str = "user_id,i,loglik,n_params,mdl,aic,aicc";
}

/// Scores candidate orders `1..=logliks.len()`. Entry `j` of each slice
/// describes order `j + 1`. AICc is infinite (the order is rejected) when
/// `N <= n_params + 1`. Ties go to the smaller order.
pub fn criteria(logliks: &[f64], params: &[u64], n_samples: &[usize]) -> Result<CriterionReport> {
    if logliks.is_empty() || logliks.len() != params.len() || logliks.len() != n_samples.len() {
        return Err(Error::domain("criteria needs equal, nonempty per-order inputs"));
    }
    let rows: Vec<CriterionRow> = logliks
        .iter()
        .zip(params)
        .zip(n_samples)
        .enumerate()
        .map(|(j, ((&ll, &k), &n))| {
            let kf = k as f64;
            let nf = n as f64;
            let aic = -2.0 * ll + 2.0 * kf;
            let aicc = if nf > kf + 1.0 { aic + 2.0 * kf * (kf - 1.0) / (nf - kf - 1.0) } else { f64::INFINITY };
            CriterionRow {
                order: j + 1,
                loglik: ll,
                n_params: k,
                n_samples: n,
                mdl: -ll + kf / 2.0 * nf.ln(),
                aic,
                aicc,
            }
        })
        .collect();
    if n_samples.contains(&0) {
        return Err(Error::domain("criteria needs N > 0"));
    }
    let argmin = |f: fn(&CriterionRow) -> f64| {
        rows.iter()
            .fold((1, f64::INFINITY), |(best, bv), r| if f(r) < bv { (r.order, f(r)) } else { (best, bv) })
            .0
    };
    Ok(CriterionReport {
        chosen_mdl: argmin(|r| r.mdl),
        chosen_aic: argmin(|r| r.aic),
        chosen_aicc: argmin(|r| r.aicc),
        rows,
    })
}

/// Chooses the order in `1..=k_opt` minimising `criterion`, counting
/// parameters over the alphabet observed in `tree`.
pub fn select_order(
    seq: &[Symbol],
    tree: &FrequencyTree,
    k_opt: usize,
    criterion: Criterion,
    mode: SampleMode,
    params: ParamCount,
) -> Result<(usize, CriterionReport)> {
    if k_opt == 0 {
        return Err(Error::domain("k_opt must be at least 1"));
    }
    let (m_u, _) = tree.observed_alphabet()?;
    // Orders that cannot be evaluated on this sequence are not candidates.
    let top = k_opt.min(seq.len().saturating_sub(1)).max(1);
    if seq.len() < 2 {
        return Err(Error::domain("order selection needs at least two symbols"));
    }
    let mut lls = Vec::with_capacity(top);
    let mut ns = Vec::with_capacity(top);
    for i in 1..=top {
        let start = match mode {
            SampleMode::Transitions => i,
            SampleMode::CommonN => top,
        };
        let (ll, n) = sequence_loglik_from(seq, i, start)?;
        lls.push(ll);
        ns.push(n);
    }
    let counts: Vec<u64> = (1..=top).map(|i| params.count(m_u, i)).collect();
    let report = criteria(&lls, &counts, &ns)?;
    Ok((report.chosen(criterion), report))
}
