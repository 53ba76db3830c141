use thiserror::Error;

use crate::data::Label;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: unknown label `{value}`")]
    Label { line: usize, value: String },

    #[error("{context}: {message}")]
    Value { context: String, message: String },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("degenerate score set: no {0} samples")]
    DegenerateSet(Label),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("reports use different parameters: `{first}` has (alpha={a1}, beta={b1}), `{other}` has (alpha={a2}, beta={b2})")]
    ParamMismatch {
        first: String,
        other: String,
        a1: f64,
        b1: f64,
        a2: f64,
        b2: f64,
    },

    #[error("no threshold attains precision >= {target}; maximum attainable precision is {max_attainable}")]
    UnattainablePrecision { target: f64, max_attainable: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("degenerate sequence: cross-perplexity is {0}, cannot normalize")]
    DegenerateSequence(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("training diverged at epoch {epoch} (step {step}): objective is {value}")]
    Divergence { epoch: usize, step: usize, value: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn value(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Value {
            context: context.into(),
            message: message.into(),
        }
    }
}
