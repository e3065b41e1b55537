//! Escape-weighted blending of conditional estimates across orders.
//!
//! For a context `c` of `k` symbols (most recent last) the order-`k` estimate
//! of the next symbol `t` is
//!
//! ```text
//! P_k(t) = N(c,t)/N(c) + (1 - sum_j N(c,j)/N(c)) * P_{k-1}(t)
//! ```
//!
//! where `N(.)` are tree counts, the sum runs over the continuations of `c`
//! stored at depth `k + 1`, and `P_{k-1}` uses `c` with its oldest symbol
//! dropped. The base case is the unigram frequency `N(t)/n`. A context with
//! count zero contributes nothing and passes all mass to the lower order.
//!
//! Blending at order `k` never reads below depth `k + 1`, so truncating the
//! tree there changes nothing.

use crate::alphabet::Symbol;
use crate::error::{Error, Result};
use crate::freq_tree::FrequencyTree;

fn check_query(tree: &FrequencyTree, order: usize) -> Result<()> {
    if tree.is_empty() {
        return Err(Error::domain("blending needs at least one ingested symbol"));
    }
    if let Some(m) = tree.max_depth() {
        if order + 1 > m {
            return Err(Error::domain(format!("order {order} needs tree depth {} but tree depth is {m}", order + 1)));
        }
    }
    Ok(())
}

/// Unigram frequency of `t`.
pub fn prob_order0(tree: &FrequencyTree, t: Symbol) -> Result<f64> {
    check_query(tree, 0)?;
    Ok(tree.context_count(&[t]) as f64 / tree.total() as f64)
}

/// First term and escape weight of one blending level: `N(c,t)/N(c)` and
/// `1 - sum_j N(c,j)/N(c)`. A zero-count context yields `(0, 1)`.
pub fn blend_terms(tree: &FrequencyTree, context: &[Symbol], t: Symbol) -> (f64, f64) {
    match tree.context_and_followers(context) {
        Some((count, followers, _)) if count > 0 => {
            let mut with_t = context.to_vec();
            with_t.push(t);
            let hit = tree.context_count(&with_t);
            (hit as f64 / count as f64, 1.0 - followers as f64 / count as f64)
        }
        _ => (0.0, 1.0),
    }
}

/// Blended probability that `t` follows `context`, at order `context.len()`.
pub fn prob_blended(tree: &FrequencyTree, context: &[Symbol], t: Symbol) -> Result<f64> {
    check_query(tree, context.len())?;
    let mut p = tree.context_count(&[t]) as f64 / tree.total() as f64;
    for start in (0..context.len()).rev() {
        let (first, escape) = blend_terms(tree, &context[start..], t);
        p = first + escape * p;
    }
    Ok(p)
}

/// Blended distribution over the whole alphabet at order `context.len()`.
pub fn distribution(tree: &FrequencyTree, context: &[Symbol]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; tree.alphabet().size()];
    distribution_into(tree, context, &mut out)?;
    Ok(out)
}

/// As [`distribution`], writing into a caller-provided buffer of alphabet size.
pub fn distribution_into(tree: &FrequencyTree, context: &[Symbol], out: &mut [f64]) -> Result<()> {
    check_query(tree, context.len())?;
    debug_assert_eq!(out.len(), tree.alphabet().size());
    let n = tree.total() as f64;
    out.iter_mut().for_each(|p| *p = 0.0);
    let (_, _, root) = tree.context_and_followers(&[]).expect("root always exists");
    for (s, c) in tree.children_of(root) {
        out[s as usize] = c as f64 / n;
    }
    for start in (0..context.len()).rev() {
        let Some((count, followers, id)) = tree.context_and_followers(&context[start..]) else {
            continue;
        };
        if count == 0 {
            continue;
        }
        let count = count as f64;
        let escape = 1.0 - followers as f64 / count;
        out.iter_mut().for_each(|p| *p *= escape);
        for (s, c) in tree.children_of(id) {
            out[s as usize] += c as f64 / count;
        }
    }
    Ok(())
}
