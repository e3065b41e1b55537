//! Independent oracles shared by the integration and acceptance tests.
//!
//! Nothing here touches the frequency tree: counts come from scanning the
//! raw sequence.
#![allow(dead_code)]

use std::collections::HashMap;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Q = Ratio<i128>;

/// Occurrence count of every substring of length `1..=max_len`.
pub fn ngram_counts(seq: &[u16], max_len: usize) -> HashMap<Vec<u16>, i128> {
    let mut m = HashMap::new();
    for end in 1..=seq.len() {
        for len in 1..=max_len.min(end) {
            *m.entry(seq[end - len..end].to_vec()).or_insert(0) += 1;
        }
    }
    m
}

/// Literal escape recursion over raw counts, exact.
pub fn blended_exact(seq: &[u16], counts: &HashMap<Vec<u16>, i128>, alphabet: usize, ctx: &[u16], t: u16) -> Q {
    let get = |s: &[u16]| counts.get(s).copied().unwrap_or(0);
    if ctx.is_empty() {
        return Q::new(get(&[t]), seq.len() as i128);
    }
    let lower = blended_exact(seq, counts, alphabet, &ctx[1..], t);
    let n_c = get(ctx);
    if n_c == 0 {
        return lower;
    }
    let mut with = ctx.to_vec();
    with.push(0);
    let mut followed = 0;
    for j in 0..alphabet as u16 {
        *with.last_mut().unwrap() = j;
        followed += get(&with);
    }
    *with.last_mut().unwrap() = t;
    Q::new(get(&with), n_c) + (Q::from_integer(1) - Q::new(followed, n_c)) * lower
}

pub fn to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Every context of length `len` over `0..alphabet`.
pub fn all_contexts(alphabet: usize, len: usize) -> Vec<Vec<u16>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|c| {
                (0..alphabet as u16).map(move |s| {
                    let mut c = c.clone();
                    c.push(s);
                    c
                })
            })
            .collect();
    }
    out
}

/// Seeded random sequences with alphabet `<= 4` and length `<= 100`.
pub fn random_corpus(n: usize, seed: u64) -> Vec<(usize, Vec<u16>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let a = rng.random_range(1..=4usize);
            let len = rng.random_range(1..=100usize);
            (a, (0..len).map(|_| rng.random_range(0..a) as u16).collect())
        })
        .collect()
}

/// Random stochastic rows drawn from a flat Dirichlet.
pub fn random_rows(rng: &mut ChaCha8Rng, rows: usize, m: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| {
            let e: Vec<f64> = (0..m).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let s: f64 = e.iter().sum();
            e.into_iter().map(|x| x / s).collect()
        })
        .collect()
}

/// Circulant order-1 chain over `m` symbols whose rows are shifts of `row`.
/// It is doubly stochastic, so the stationary law is uniform and
/// `log2(m) - H(X_n | X_{n-1})` equals the entropy gap of a single row.
pub fn circulant(row: &[f64]) -> (Vec<Vec<f64>>, f64) {
    let m = row.len();
    let rows = (0..m).map(|i| (0..m).map(|j| row[(j + m - i) % m]).collect()).collect();
    let h: f64 = row.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum();
    (rows, (m as f64).log2() - h)
}
