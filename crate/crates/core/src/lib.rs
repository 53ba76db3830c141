//! Evaluation and training toolkit for binary detectors of machine-generated text.
//!
//! The crate is organised around the detector score: every module either
//! produces scores ([`binoculars`], [`dxo`]), summarises them ([`xrisk`],
//! [`thresholds`]), or prepares the text they are computed on ([`corpus`]).
//!
//! - [`data`]: scored records, label partitioning, attribute grouping.
//! - [`xrisk`]: AUC, AP, one-way partial AUC and two-way partial AUC on a
//!   0–100 scale, plus the lexicographic ranking of reports.
//! - [`thresholds`]: confusion metrics at a threshold, TPR@FPR and
//!   recall@precision threshold selection, deployment re-evaluation.
//! - [`dxo`]: KL-DRO surrogate objectives for pAUC / tpAUC with analytic
//!   gradients, a controlled-rate batch sampler and trainers.
//! - [`binoculars`]: perplexity, cross-perplexity and the Binoculars ratio
//!   computed from per-token probability distributions.
//! - [`corpus`]: heuristic and repetition quality checks, mixcase length
//!   planning.

pub mod binoculars;
pub mod corpus;
pub mod data;
pub mod dxo;
mod error;
pub mod thresholds;
pub mod xrisk;

mod serde_threshold;

pub use data::{group_by, parse_samples, split_by_label, Grouping, Label, LabelAliases, RecordFormat, ScoreSet, ScoredSample};
pub use error::{Error, Result};
pub use xrisk::{evaluate, rank_reports, XRiskParams, XRiskReport};
