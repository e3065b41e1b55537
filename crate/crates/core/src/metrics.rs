//! Per-user link metrics and empirical CDFs.
//!
//! A packet is lost when the predicted MCS exceeds the one the channel
//! supports. Rate efficiency is the rate actually delivered (zero for lost
//! packets) over the rate that perfect knowledge would have delivered.

use serde::{Deserialize, Serialize};

use crate::alphabet::{RateTable, Symbol};
use crate::error::{Error, Result};

fn check_pair(actual: &[Symbol], predicted: &[Symbol]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::domain(format!(
            "{} actual values but {} predictions",
            actual.len(),
            predicted.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::domain("metrics need at least one scored step"));
    }
    Ok(())
}

/// Fraction of steps where the prediction overshoots the actual value.
pub fn packet_loss(actual: &[Symbol], predicted: &[Symbol]) -> Result<f64> {
    check_pair(actual, predicted)?;
    let lost = actual.iter().zip(predicted).filter(|(a, p)| p > a).count();
    Ok(lost as f64 / actual.len() as f64)
}

/// Delivered rate over the rate available in hindsight.
pub fn rate_efficiency(actual: &[Symbol], predicted: &[Symbol], rates: &RateTable) -> Result<f64> {
    check_pair(actual, predicted)?;
    let p_max = rates.len();
    if let Some(&s) = actual.iter().chain(predicted).find(|&&s| s as usize >= p_max) {
        return Err(Error::domain(format!("symbol {s} has no entry in a rate table of {p_max}")));
    }
    let mut delivered = 0.0;
    let mut available = 0.0;
    for (&a, &p) in actual.iter().zip(predicted) {
        available += rates.rate(a);
        if p <= a {
            delivered += rates.rate(p);
        }
    }
    Ok(delivered / available)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserMetrics {
    pub p_loss: f64,
    pub r_eff: f64,
    pub packets: usize,
}

impl UserMetrics {
    pub fn compute(actual: &[Symbol], predicted: &[Symbol], rates: &RateTable) -> Result<Self> {
        Ok(Self {
            p_loss: packet_loss(actual, predicted)?,
            r_eff: rate_efficiency(actual, predicted, rates)?,
            packets: actual.len(),
        })
    }
}

/// Empirical CDF as `(value, k/n)` steps over the sorted values.
pub fn cdf(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::domain("cdf of an empty sample"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::domain("cdf sample contains NaN"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    Ok(v.into_iter().enumerate().map(|(i, x)| (x, (i + 1) as f64 / n)).collect())
}

/// Smallest sample value whose CDF height reaches `q`.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::domain(format!("quantile {q} outside [0, 1]")));
    }
    let steps = cdf(values)?;
    let idx = ((q * steps.len() as f64).ceil() as usize).clamp(1, steps.len()) - 1;
    Ok(steps[idx].0)
}
