//! Pairwise surrogate and the KL-regularized DRO aggregation.

/// Squared hinge `max(0, c − x)²` and its derivative in `x`.
pub fn squared_hinge(margin: f64, x: f64) -> (f64, f64) {
    let gap = (margin - x).max(0.0);
    (gap * gap, -2.0 * gap)
}

/// Closed form of the KL-regularized worst-case reweighting of `losses`:
/// `λ · log((1/n) Σ exp(ℓᵢ / λ))`.
///
/// Evaluated as `max ℓ + λ · ln1p(mean(expm1((ℓᵢ − max ℓ)/λ)))`, which is
/// exact for constant inputs and stays accurate for very small and very large
/// `λ`. The result lies in `[mean ℓ, max ℓ]` and tends to the mean as
/// `λ → ∞` and to the max as `λ → 0`.
///
/// # Panics
/// If `losses` is empty.
pub fn kl_dro_aggregate(losses: &[f64], lambda: f64) -> f64 {
    assert!(!losses.is_empty(), "kl_dro_aggregate needs at least one loss");
    let max = losses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifted_mean = losses.iter().map(|l| ((l - max) / lambda).exp_m1()).sum::<f64>() / losses.len() as f64;
    max + lambda * shifted_mean.ln_1p()
}

/// Softmax weights `exp(ℓᵢ/λ) / Σ exp(ℓⱼ/λ)`: the optimal DRO distribution and
/// the gradient of [`kl_dro_aggregate`] with respect to each loss.
pub fn kl_dro_weights(losses: &[f64], lambda: f64, out: &mut Vec<f64>) {
    out.clear();
    let max = losses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    out.extend(losses.iter().map(|l| ((l - max) / lambda).exp()));
    let total: f64 = out.iter().sum();
    for w in out.iter_mut() {
        *w /= total;
    }
}

/// `ln(eᵃ + eᵇ)` without overflow.
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln((1/n) Σ exp(xᵢ))`.
pub(crate) fn log_mean_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + (x - max).exp(), n + 1));
    max + (sum / n as f64).ln()
}
