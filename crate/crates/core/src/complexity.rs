//! Online predictive information per candidate order and the order upper
//! bound derived from its learning curve.
//!
//! After each ingested symbol the blended next-symbol distribution `P` at
//! order `k` is scored as `log2(p) - H(P)`, and the running mean of that score
//! over time estimates `Ipred(k)`. All quantities here are in bits.

use crate::alphabet::Symbol;
use crate::blend;
use crate::error::{Error, Result};
use crate::freq_tree::FrequencyTree;

/// Default number of candidate orders.
pub const DEFAULT_MAX_ORDER: usize = 4;
/// Default learning-curve threshold in bits.
pub const DEFAULT_EPSILON: f64 = 0.05;

/// `log2(p) - H(dist)`, where `p = dist.len()`.
///
/// Evaluated as `sum_t P(t) log2(p P(t))`, the divergence from the uniform
/// distribution, which is exactly zero for a uniform `dist` and nonnegative
/// up to rounding.
pub fn ipred_of_distribution(dist: &[f64]) -> f64 {
    let p = dist.len() as f64;
    let kl: f64 = dist.iter().filter(|&&q| q > 0.0).map(|&q| q * (p * q).log2()).sum();
    // Gibbs' inequality; only rounding can push this below zero.
    kl.max(0.0)
}

/// Instantaneous predictive information of the blended distribution that
/// follows `context`.
pub fn ipred_instant(tree: &FrequencyTree, context: &[Symbol]) -> Result<f64> {
    Ok(ipred_of_distribution(&blend::distribution(tree, context)?))
}

/// Running means of `Ipred(k)` for `k = 1..=max_order`.
#[derive(Debug, Clone)]
pub struct PredictiveInfoEstimate {
    sums: Vec<f64>,
    n_used: u64,
    alphabet_size: usize,
    scratch: Vec<f64>,
}

impl PredictiveInfoEstimate {
    pub fn new(max_order: usize, alphabet_size: usize) -> Result<Self> {
        if max_order == 0 {
            return Err(Error::domain("max order must be at least 1"));
        }
        Ok(Self { sums: vec![0.0; max_order], n_used: 0, alphabet_size, scratch: vec![0.0; alphabet_size] })
    }

    pub fn max_order(&self) -> usize {
        self.sums.len()
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// Number of positions averaged, shared by every order.
    pub fn n_used(&self) -> u64 {
        self.n_used
    }

    /// Folds in one position. `recent` holds the ingested symbols, most recent
    /// last, and must already be reflected in `tree`. Positions with fewer
    /// than `max_order` symbols of history are skipped so that every order
    /// averages over the same positions.
    pub fn update(&mut self, tree: &FrequencyTree, recent: &[Symbol]) -> Result<()> {
        let k_max = self.max_order();
        if recent.len() < k_max {
            return Ok(());
        }
        for k in 1..=k_max {
            blend::distribution_into(tree, &recent[recent.len() - k..], &mut self.scratch)?;
            self.sums[k - 1] += ipred_of_distribution(&self.scratch);
        }
        self.n_used += 1;
        Ok(())
    }

    /// Current `Ipred(k)` for `k = 1..=max_order`; all zero before the first update.
    pub fn ipred(&self) -> Vec<f64> {
        let n = self.n_used.max(1) as f64;
        self.sums.iter().map(|s| s / n).collect()
    }
}

/// `L(1) = Ipred(1)` and `L(k) = Ipred(k) - Ipred(k-1)` for `k >= 2`.
pub fn learning_curve(ipred: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    ipred
        .iter()
        .map(|&v| {
            let d = v - prev;
            prev = v;
            d
        })
        .collect()
}

/// Largest `k` whose learning-curve gain exceeds `epsilon`, or 1 if none does.
pub fn k_opt(learning_curve: &[f64], epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0) {
        return Err(Error::domain(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(learning_curve.iter().rposition(|&l| l > epsilon).map_or(1, |i| i + 1))
}
