//! Full-batch KL-DRO partial-AUC objectives and their analytic gradients.
//!
//! With `Lᵢⱼ = ℓ(h(xᵢ) − h(xⱼ))` for positive `i` and negative `j`, and
//! `Sᵢ = λ·log((1/n−) Σⱼ exp(Lᵢⱼ/λ))`:
//!
//! - pAUC objective: `(1/n+) Σᵢ Sᵢ`
//! - tpAUC objective: `λ′·log((1/n+) Σᵢ exp(Sᵢ/λ′))`, which is the same as
//!   `λ′·log((1/n+) Σᵢ ((1/n−) Σⱼ exp(Lᵢⱼ/λ))^{λ/λ′})` with the exponent
//!   applied in log space.
//!
//! Both gradients take the form `Σᵢ uᵢ Σⱼ wᵢⱼ ℓ′(dᵢⱼ) (∇h(xᵢ) − ∇h(xⱼ))`, where
//! `wᵢ·` is the softmax of `Lᵢ·/λ` and `u` is `1/n+` (pAUC) or the softmax of
//! `S/λ′` (tpAUC).

use crate::data::Label;
use crate::error::{Error, Result};

use super::config::{DxoConfig, Objective};
use super::dataset::{FeatureDataset, FeatureSample};
use super::loss::{kl_dro_aggregate, kl_dro_weights, squared_hinge};
use super::scorer::Scorer;

/// Squared-hinge loss of one (positive, negative) pair.
pub fn pairwise_surrogate(scorer: &Scorer, xi: &FeatureSample, xj: &FeatureSample, margin: f64) -> Result<f64> {
    if xi.label != Label::Positive || xj.label != Label::Negative {
        return Err(Error::Contract(format!(
            "pairwise surrogate expects (positive, negative), got ({}, {})",
            xi.label, xj.label
        )));
    }
    Ok(squared_hinge(margin, scorer.score(&xi.features) - scorer.score(&xj.features)).0)
}

fn check_inputs(scorer: &Scorer, data: &FeatureDataset) -> Result<()> {
    data.require_both_classes()?;
    if scorer.dim() != data.dim() {
        return Err(Error::Contract(format!(
            "scorer expects {} features, dataset has {}",
            scorer.dim(),
            data.dim()
        )));
    }
    Ok(())
}

pub fn pauc_objective(scorer: &Scorer, data: &FeatureDataset, cfg: &DxoConfig) -> Result<f64> {
    check_inputs(scorer, data)?;
    Ok(subset_value(scorer, data, data.positives(), data.negatives(), cfg, Objective::PaucKl))
}

pub fn tpauc_objective(scorer: &Scorer, data: &FeatureDataset, cfg: &DxoConfig) -> Result<f64> {
    check_inputs(scorer, data)?;
    Ok(subset_value(scorer, data, data.positives(), data.negatives(), cfg, Objective::TpaucKl))
}

/// Value of the objective selected by `cfg.objective`.
pub fn objective_value(scorer: &Scorer, data: &FeatureDataset, cfg: &DxoConfig) -> Result<f64> {
    check_inputs(scorer, data)?;
    Ok(subset_value(scorer, data, data.positives(), data.negatives(), cfg, cfg.objective))
}

/// Gradient of the objective selected by `cfg.objective` with respect to
/// every scorer parameter.
pub fn objective_gradient(scorer: &Scorer, data: &FeatureDataset, cfg: &DxoConfig) -> Result<Vec<f64>> {
    value_and_gradient(scorer, data, cfg).map(|(_, g)| g)
}

pub fn value_and_gradient(scorer: &Scorer, data: &FeatureDataset, cfg: &DxoConfig) -> Result<(f64, Vec<f64>)> {
    check_inputs(scorer, data)?;
    Ok(subset_value_and_gradient(scorer, data, data.positives(), data.negatives(), cfg))
}

fn scores_of(scorer: &Scorer, data: &FeatureDataset, idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| scorer.score(&data.sample(i).features)).collect()
}

fn fill_losses(pos_score: f64, neg_scores: &[f64], margin: f64, losses: &mut Vec<f64>, derivs: &mut Vec<f64>) {
    losses.clear();
    derivs.clear();
    for &sn in neg_scores {
        let (l, d) = squared_hinge(margin, pos_score - sn);
        losses.push(l);
        derivs.push(d);
    }
}

/// Per-positive soft-max terms `Sᵢ` over the given negatives.
fn per_positive_terms(pos_scores: &[f64], neg_scores: &[f64], cfg: &DxoConfig) -> Vec<f64> {
    let (mut losses, mut derivs) = (Vec::with_capacity(neg_scores.len()), Vec::with_capacity(neg_scores.len()));
    pos_scores
        .iter()
        .map(|&sp| {
            fill_losses(sp, neg_scores, cfg.margin, &mut losses, &mut derivs);
            kl_dro_aggregate(&losses, cfg.lambda)
        })
        .collect()
}

fn combine(terms: &[f64], cfg: &DxoConfig, objective: Objective) -> f64 {
    match objective {
        Objective::PaucKl => terms.iter().sum::<f64>() / terms.len() as f64,
        Objective::TpaucKl => kl_dro_aggregate(terms, cfg.lambda_prime),
    }
}

/// Objective restricted to the given positive / negative indices.
pub(crate) fn subset_value(
    scorer: &Scorer,
    data: &FeatureDataset,
    pos: &[usize],
    neg: &[usize],
    cfg: &DxoConfig,
    objective: Objective,
) -> f64 {
    let terms = per_positive_terms(&scores_of(scorer, data, pos), &scores_of(scorer, data, neg), cfg);
    combine(&terms, cfg, objective)
}

pub(crate) fn subset_value_and_gradient(
    scorer: &Scorer,
    data: &FeatureDataset,
    pos: &[usize],
    neg: &[usize],
    cfg: &DxoConfig,
) -> (f64, Vec<f64>) {
    let pos_scores = scores_of(scorer, data, pos);
    let neg_scores = scores_of(scorer, data, neg);
    let terms = per_positive_terms(&pos_scores, &neg_scores, cfg);
    let value = combine(&terms, cfg, cfg.objective);

    let outer: Vec<f64> = match cfg.objective {
        Objective::PaucKl => vec![1.0 / pos.len() as f64; pos.len()],
        Objective::TpaucKl => {
            let mut u = Vec::new();
            kl_dro_weights(&terms, cfg.lambda_prime, &mut u);
            u
        }
    };

    // Coefficients of ∇h at each positive / negative sample.
    let mut pos_coef = vec![0.0; pos.len()];
    let mut neg_coef = vec![0.0; neg.len()];
    let (mut losses, mut derivs, mut inner) = (Vec::new(), Vec::new(), Vec::new());
    for (k, &sp) in pos_scores.iter().enumerate() {
        fill_losses(sp, &neg_scores, cfg.margin, &mut losses, &mut derivs);
        kl_dro_weights(&losses, cfg.lambda, &mut inner);
        for (m, (&w, &d)) in inner.iter().zip(&derivs).enumerate() {
            let t = outer[k] * w * d;
            pos_coef[k] += t;
            neg_coef[m] -= t;
        }
    }

    let mut grad = vec![0.0; scorer.n_params()];
    for (&i, &c) in pos.iter().zip(&pos_coef) {
        scorer.accumulate_grad(&data.sample(i).features, c, &mut grad);
    }
    for (&j, &c) in neg.iter().zip(&neg_coef) {
        scorer.accumulate_grad(&data.sample(j).features, c, &mut grad);
    }
    (value, grad)
}
