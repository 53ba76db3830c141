//! Fixed-threshold confusion metrics and the two threshold-selection rules:
//! TPR@FPR (ROC) and recall@precision (PRC).
//!
//! Candidate thresholds are the distinct observed scores plus a `+∞`
//! sentinel; a sample is predicted positive when `score ≥ threshold`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::ScoreSet;
use crate::error::{Error, Result};
use crate::serde_threshold;
use crate::xrisk::sweep;

/// Confusion counts and rates at one threshold. Rates are percentages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMetrics {
    #[serde(with = "serde_threshold")]
    pub threshold: f64,
    #[serde(with = "serde_threshold")]
    pub display_threshold: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fpr: f64,
    pub tpr_recall: f64,
    pub precision: f64,
    pub macro_f1: f64,
}

/// Display scale for a threshold: scores in `[0, 1]` are shown on 0–100.
pub fn display_threshold(set: &ScoreSet, threshold: f64) -> f64 {
    if set.is_unit_interval() {
        100.0 * threshold
    } else {
        threshold
    }
}

fn ratio_or_zero(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ConfusionMetrics {
    pub fn from_counts(threshold: f64, display_threshold: f64, tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        let f1_pos = ratio_or_zero(2 * tp, 2 * tp + fp + fn_);
        let f1_neg = ratio_or_zero(2 * tn, 2 * tn + fn_ + fp);
        ConfusionMetrics {
            threshold,
            display_threshold,
            tp,
            fp,
            tn,
            fn_,
            fpr: 100.0 * ratio_or_zero(fp, fp + tn),
            tpr_recall: 100.0 * ratio_or_zero(tp, tp + fn_),
            precision: 100.0 * ratio_or_zero(tp, tp + fp),
            macro_f1: 100.0 * (f1_pos + f1_neg) / 2.0,
        }
    }
}

/// Confusion metrics for the rule `score ≥ threshold`. An empty prediction
/// set has precision 0 and positive-class F1 0.
pub fn confusion_at(set: &ScoreSet, threshold: f64) -> ConfusionMetrics {
    let tp = set.positives().iter().filter(|(_, s)| *s >= threshold).count();
    let fp = set.negatives().iter().filter(|(_, s)| *s >= threshold).count();
    ConfusionMetrics::from_counts(
        threshold,
        display_threshold(set, threshold),
        tp,
        fp,
        set.n_neg() - fp,
        set.n_pos() - tp,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    Fixed,
    TprAtFpr,
    RecallAtPrecision,
}

impl SelectionMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SelectionMethod::Fixed => "fixed",
            SelectionMethod::TprAtFpr => "tpr_at_fpr",
            SelectionMethod::RecallAtPrecision => "recall_at_precision",
        }
    }
}

/// A threshold picked on a development set, with the metrics it achieved there.
/// `target` is the FPR cap, the precision floor, or the fixed threshold itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdChoice {
    pub method: SelectionMethod,
    pub target: f64,
    #[serde(with = "serde_threshold")]
    pub threshold: f64,
    pub dev_metrics: ConfusionMetrics,
}

impl ThresholdChoice {
    /// Row label such as `tpr_at_fpr@0.05`.
    pub fn label(&self) -> String {
        format!("{}@{}", self.method.as_str(), self.target)
    }
}

pub fn fixed_threshold(set: &ScoreSet, threshold: f64) -> Result<ThresholdChoice> {
    if threshold.is_nan() {
        return Err(Error::InvalidParams("threshold is NaN".into()));
    }
    Ok(ThresholdChoice {
        method: SelectionMethod::Fixed,
        target: threshold,
        threshold,
        dev_metrics: confusion_at(set, threshold),
    })
}

/// Smallest candidate threshold whose FPR does not exceed `beta`, i.e. the
/// operating point with the largest FPR ≤ β and, among those, the largest TPR.
pub fn threshold_at_max_fpr(set: &ScoreSet, beta: f64) -> Result<ThresholdChoice> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParams(format!("max FPR must be in (0, 1), got {beta}")));
    }
    let nn = set.n_neg() as f64;
    // FPR is non-decreasing along the descending sweep.
    let threshold = sweep(set)
        .into_iter()
        .take_while(|p| p.fp as f64 / nn <= beta)
        .last()
        .map_or(f64::INFINITY, |p| p.threshold);
    Ok(ThresholdChoice {
        method: SelectionMethod::TprAtFpr,
        target: beta,
        threshold,
        dev_metrics: confusion_at(set, threshold),
    })
}

/// Highest-recall observed threshold whose precision is at least `min_precision`;
/// equal recall prefers the larger threshold.
pub fn threshold_at_min_precision(set: &ScoreSet, min_precision: f64) -> Result<ThresholdChoice> {
    if !(min_precision > 0.0 && min_precision <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "min precision must be in (0, 1], got {min_precision}"
        )));
    }
    let mut best: Option<(f64, usize)> = None;
    let mut max_precision: f64 = 0.0;
    for p in sweep(set) {
        let precision = p.tp as f64 / (p.tp + p.fp) as f64;
        max_precision = max_precision.max(precision);
        if precision >= min_precision && best.is_none_or(|(_, tp)| p.tp > tp) {
            best = Some((p.threshold, p.tp));
        }
    }
    let (threshold, _) = best.ok_or(Error::UnattainablePrecision {
        target: min_precision,
        max_attainable: max_precision,
    })?;
    Ok(ThresholdChoice {
        method: SelectionMethod::RecallAtPrecision,
        target: min_precision,
        threshold,
        dev_metrics: confusion_at(set, threshold),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeploymentRow {
    pub method: SelectionMethod,
    pub label: String,
    #[serde(with = "serde_threshold")]
    pub threshold: f64,
    pub metrics: ConfusionMetrics,
}

/// Re-evaluates dev-selected thresholds on a deployment set. Thresholds are
/// carried over unchanged and rows keep the order of `choices`.
pub fn deployment_report(choices: &[ThresholdChoice], deploy: &ScoreSet) -> Vec<DeploymentRow> {
    choices
        .iter()
        .map(|c| DeploymentRow {
            method: c.method,
            label: c.label(),
            threshold: c.threshold,
            metrics: confusion_at(deploy, c.threshold),
        })
        .collect()
}

pub const DEPLOYMENT_CSV_HEADER: [&str; 7] = [
    "method",
    "threshold",
    "display_threshold",
    "fpr",
    "tpr_recall",
    "precision",
    "macro_f1",
];

fn fixed2(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.2}")
    } else {
        serde_threshold::format(x)
    }
}

/// Writes the deployment table; rates are percentages with two decimals.
pub fn write_deployment_csv<W: Write>(rows: &[DeploymentRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let to_io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(DEPLOYMENT_CSV_HEADER).map_err(to_io)?;
    for r in rows {
        let m = &r.metrics;
        w.write_record([
            r.label.clone(),
            serde_threshold::format(r.threshold),
            fixed2(m.display_threshold),
            fixed2(m.fpr),
            fixed2(m.tpr_recall),
            fixed2(m.precision),
            fixed2(m.macro_f1),
        ])
        .map_err(to_io)?;
    }
    w.flush()?;
    Ok(())
}
