//! X-risk metrics: AUC, average precision, one-way partial AUC (pAUC) and
//! two-way partial AUC (tpAUC), all reported on a 0–100 scale.
//!
//! pAUC and tpAUC use the normalized pairwise form over the hardest subsets:
//! the `⌈β·n−⌉` highest-scored negatives and the `⌈(1−α)·n+⌉` lowest-scored
//! positives. Every pairwise metric credits a tie with one half. Because the
//! hard subsets are the extreme tails, `tpAUC(α, β) ≤ pAUC(β) ≤ AUC` always
//! holds, and `pAUC(1) = tpAUC(0, 1) = AUC` exactly.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::data::ScoreSet;
use crate::error::{Error, Result};

/// Bounds for the partial metrics: TPR ≥ `alpha`, FPR ≤ `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XRiskParams {
    alpha: f64,
    beta: f64,
}

impl XRiskParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidParams(format!("alpha must be in [0, 1), got {alpha}")));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidParams(format!("beta must be in (0, 1], got {beta}")));
        }
        Ok(XRiskParams { alpha, beta })
    }

    /// tpAUC(50%, 5%) / pAUC(5%), the standard reporting point.
    pub fn standard() -> Self {
        XRiskParams { alpha: 0.50, beta: 0.05 }
    }

    /// Relaxed bounds used for adversarial test sets, tpAUC(40%, 30%).
    pub fn adversarial() -> Self {
        XRiskParams { alpha: 0.40, beta: 0.30 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl Default for XRiskParams {
    fn default() -> Self {
        Self::standard()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    #[serde(with = "crate::serde_threshold")]
    pub threshold: f64,
}

/// ROC curve from the `score ≥ threshold` rule. Starts at (0, 0) with a
/// `+∞` threshold and ends at (1, 1) at the minimum observed score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
    pub threshold: f64,
}

/// Precision–recall curve, one point per distinct observed score (descending).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
}

/// Cumulative counts after admitting every sample with `score ≥ threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SweepPoint {
    pub threshold: f64,
    pub tp: usize,
    pub fp: usize,
}

/// Threshold sweep over the distinct observed scores, descending. Tied scores
/// form one block.
pub(crate) fn sweep(set: &ScoreSet) -> Vec<SweepPoint> {
    let mut all: Vec<(f64, bool)> = set
        .positives()
        .iter()
        .map(|(_, s)| (*s, true))
        .chain(set.negatives().iter().map(|(_, s)| (*s, false)))
        .collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut out: Vec<SweepPoint> = Vec::new();
    let (mut tp, mut fp) = (0, 0);
    let mut i = 0;
    while i < all.len() {
        let threshold = all[i].0;
        while i < all.len() && all[i].0 == threshold {
            if all[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        out.push(SweepPoint { threshold, tp, fp });
    }
    out
}

pub fn roc_curve(set: &ScoreSet) -> RocCurve {
    let (np, nn) = (set.n_pos() as f64, set.n_neg() as f64);
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    points.extend(sweep(set).into_iter().map(|p| RocPoint {
        fpr: p.fp as f64 / nn,
        tpr: p.tp as f64 / np,
        threshold: p.threshold,
    }));
    RocCurve { points }
}

pub fn pr_curve(set: &ScoreSet) -> PrCurve {
    let np = set.n_pos() as f64;
    let points = sweep(set)
        .into_iter()
        .map(|p| PrPoint {
            recall: p.tp as f64 / np,
            precision: p.tp as f64 / (p.tp + p.fp) as f64,
            threshold: p.threshold,
        })
        .collect();
    PrCurve { points }
}

/// Fraction of (positive, negative) pairs ordered correctly, ties counted ½.
/// O((n+ + n−) log n−) via binary search over the sorted negatives.
fn pairwise_win_fraction(positives: &[f64], negatives: &[f64]) -> f64 {
    let mut neg = negatives.to_vec();
    neg.sort_by(f64::total_cmp);
    let twice_wins: u64 = positives
        .iter()
        .map(|&p| {
            let below = neg.partition_point(|&n| n < p);
            let not_above = neg.partition_point(|&n| n <= p);
            (2 * below + (not_above - below)) as u64
        })
        .sum();
    twice_wins as f64 / (2 * positives.len() * neg.len()) as f64
}

pub fn auc(set: &ScoreSet) -> f64 {
    100.0 * pairwise_win_fraction(&set.positive_scores(), &set.negative_scores())
}

/// Step-wise area under the PR curve: Σ (Rₖ − Rₖ₋₁)·Pₖ over rank blocks.
pub fn average_precision(set: &ScoreSet) -> f64 {
    let np = set.n_pos() as f64;
    let mut ap = 0.0;
    let mut prev_tp = 0;
    for p in sweep(set) {
        if p.tp > prev_tp {
            let precision = p.tp as f64 / (p.tp + p.fp) as f64;
            ap += (p.tp - prev_tp) as f64 * precision;
            prev_tp = p.tp;
        }
    }
    100.0 * (ap / np).min(1.0)
}

/// `⌈fraction·n⌉` clamped to `[1, n]`. The small slack absorbs products such
/// as `0.3 * 10 = 3.0000000000000004`.
fn subset_size(fraction: f64, n: usize) -> usize {
    let raw = (fraction * n as f64 - 1e-9).ceil();
    (raw.max(1.0) as usize).min(n)
}

fn by_score_then_id(a: &(String, f64), b: &(String, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0))
}

/// An `(id, score)` pair.
pub type IdScore = (String, f64);

/// The `⌈(1−α)·n+⌉` lowest-scored positives and the `⌈β·n−⌉` highest-scored
/// negatives. Boundary ties are broken by ascending id.
pub fn hardest_subsets(set: &ScoreSet, params: &XRiskParams) -> (Vec<IdScore>, Vec<IdScore>) {
    let n1 = subset_size(1.0 - params.alpha, set.n_pos());
    let n2 = subset_size(params.beta, set.n_neg());

    let mut pos = set.positives().to_vec();
    pos.sort_by(by_score_then_id);
    pos.truncate(n1);

    let mut neg = set.negatives().to_vec();
    neg.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    neg.truncate(n2);

    (pos, neg)
}

fn scores(xs: &[(String, f64)]) -> Vec<f64> {
    xs.iter().map(|(_, s)| *s).collect()
}

/// One-way partial AUC: all positives against the hardest `β` fraction of
/// negatives.
pub fn partial_auc(set: &ScoreSet, beta: f64) -> Result<f64> {
    let params = XRiskParams::new(0.0, beta)?;
    Ok(partial_auc_with(set, &params))
}

fn partial_auc_with(set: &ScoreSet, params: &XRiskParams) -> f64 {
    let n2 = subset_size(params.beta, set.n_neg());
    let mut neg = set.negatives().to_vec();
    neg.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    neg.truncate(n2);
    100.0 * pairwise_win_fraction(&set.positive_scores(), &scores(&neg))
}

/// Two-way partial AUC: hardest `1−α` positives against hardest `β` negatives.
pub fn two_way_partial_auc(set: &ScoreSet, params: &XRiskParams) -> f64 {
    let (pos, neg) = hardest_subsets(set, params);
    100.0 * pairwise_win_fraction(&scores(&pos), &scores(&neg))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XRiskReport {
    pub tpauc: f64,
    pub pauc: f64,
    pub auc: f64,
    pub ap: f64,
    pub params: XRiskParams,
    pub n_pos: usize,
    pub n_neg: usize,
}

pub fn evaluate(set: &ScoreSet, params: &XRiskParams) -> XRiskReport {
    XRiskReport {
        tpauc: two_way_partial_auc(set, params),
        pauc: partial_auc_with(set, params),
        auc: auc(set),
        ap: average_precision(set),
        params: *params,
        n_pos: set.n_pos(),
        n_neg: set.n_neg(),
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Flat serialized form of a named report; metrics rounded to two decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    pub alpha: f64,
    pub beta: f64,
    pub tpauc: f64,
    pub pauc: f64,
    pub auc: f64,
    pub ap: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

impl XRiskReport {
    pub fn to_row(&self, name: &str) -> ReportRow {
        ReportRow {
            name: name.to_string(),
            alpha: self.params.alpha,
            beta: self.params.beta,
            tpauc: round2(self.tpauc),
            pauc: round2(self.pauc),
            auc: round2(self.auc),
            ap: round2(self.ap),
            n_pos: self.n_pos,
            n_neg: self.n_neg,
        }
    }
}

impl ReportRow {
    pub fn into_named_report(self) -> Result<(String, XRiskReport)> {
        let params = XRiskParams::new(self.alpha, self.beta)?;
        for (metric, v) in [("tpauc", self.tpauc), ("pauc", self.pauc), ("auc", self.auc), ("ap", self.ap)] {
            if !(0.0..=100.0).contains(&v) {
                return Err(Error::value(format!("report `{}`", self.name), format!("{metric}={v} outside [0, 100]")));
            }
        }
        let report = XRiskReport {
            tpauc: self.tpauc,
            pauc: self.pauc,
            auc: self.auc,
            ap: self.ap,
            params,
            n_pos: self.n_pos,
            n_neg: self.n_neg,
        };
        Ok((self.name, report))
    }
}

/// Orders reports by tpAUC, then pAUC, then AUC, then AP (all descending);
/// exact ties fall back to ascending name.
pub fn rank_reports(mut reports: Vec<(String, XRiskReport)>) -> Result<Vec<(String, XRiskReport)>> {
    if let Some((first_name, first)) = reports.first() {
        if let Some((name, r)) = reports.iter().find(|(_, r)| r.params != first.params) {
            return Err(Error::ParamMismatch {
                first: first_name.clone(),
                other: name.clone(),
                a1: first.params.alpha,
                b1: first.params.beta,
                a2: r.params.alpha,
                b2: r.params.beta,
            });
        }
    }
    reports.sort_by(|(na, a), (nb, b)| {
        b.tpauc
            .total_cmp(&a.tpauc)
            .then_with(|| b.pauc.total_cmp(&a.pauc))
            .then_with(|| b.auc.total_cmp(&a.auc))
            .then_with(|| b.ap.total_cmp(&a.ap))
            .then_with(|| na.cmp(nb))
    });
    Ok(reports)
}
