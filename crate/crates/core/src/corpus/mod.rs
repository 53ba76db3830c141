//! Text quality screening and mixcase length planning.

mod mixcase;
mod quality;

pub use mixcase::{mixcase_plan, MixcasePlan, MixcasePlanner};
pub use quality::{
    duplicate_line_fraction, duplicate_ngram_char_fraction, duplicate_paragraph_fraction, quality_report, Bound,
    NgramMode, QualityCheck, QualityConfig, QualityReport, STOP_WORDS,
};
