#![allow(dead_code)]

use proptest::prelude::*;
use xrisk_core::ScoreSet;

/// Quadratic pairwise win rate with half credit for ties, on 0–100.
pub fn pairwise_oracle(pos: &[f64], neg: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &p in pos {
        for &n in neg {
            if p > n {
                wins += 1.0;
            } else if p == n {
                wins += 0.5;
            }
        }
    }
    100.0 * wins / (pos.len() * neg.len()) as f64
}

/// Smallest k with k ≥ f·n, at least 1.
pub fn ceil_count(f: f64, n: usize) -> usize {
    (1..=n).find(|&k| k as f64 >= f * n as f64 - 1e-9).unwrap_or(n)
}

pub fn hardest_negatives(set: &ScoreSet, beta: f64) -> Vec<f64> {
    let mut neg = set.negatives().to_vec();
    neg.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    neg.into_iter().take(ceil_count(beta, set.n_neg())).map(|x| x.1).collect()
}

pub fn hardest_positives(set: &ScoreSet, alpha: f64) -> Vec<f64> {
    let mut pos = set.positives().to_vec();
    pos.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    pos.into_iter().take(ceil_count(1.0 - alpha, set.n_pos())).map(|x| x.1).collect()
}

pub fn pauc_oracle(set: &ScoreSet, beta: f64) -> f64 {
    pairwise_oracle(&set.positive_scores(), &hardest_negatives(set, beta))
}

pub fn tpauc_oracle(set: &ScoreSet, alpha: f64, beta: f64) -> f64 {
    pairwise_oracle(&hardest_positives(set, alpha), &hardest_negatives(set, beta))
}

/// Score sets with 1..=50 per class. Scores come from a small grid so ties are common.
pub fn score_set() -> impl Strategy<Value = ScoreSet> {
    let scores = |n| prop::collection::vec(prop_oneof![(0u8..10).prop_map(|k| k as f64 / 10.0), 0.0..1.0f64], 1..=n);
    (scores(50), scores(50)).prop_map(|(p, n)| ScoreSet::from_scores(&p, &n).unwrap())
}
