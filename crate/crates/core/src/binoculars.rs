//! Log-perplexity, cross-perplexity and the Binoculars score, computed from
//! per-position next-token distributions produced elsewhere by an observer
//! model and a performer model.
//!
//! Natural logarithms throughout. Probabilities are clamped to at least
//! [`PROB_EPSILON`] before taking a log, and a zero observer probability
//! contributes nothing to the cross-entropy sum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PROB_EPSILON: f64 = 1e-12;
/// Allowed deviation of each distribution's total mass from 1.
pub const MASS_TOLERANCE: f64 = 1e-6;

/// Token ids and the two models' distributions at every position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSequence")]
pub struct TokenSequenceScores {
    vocab_size: usize,
    tokens: Vec<usize>,
    observer: Vec<Vec<f64>>,
    performer: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawSequence {
    vocab_size: usize,
    tokens: Vec<usize>,
    observer: Vec<Vec<f64>>,
    performer: Vec<Vec<f64>>,
}

impl TryFrom<RawSequence> for TokenSequenceScores {
    type Error = Error;

    fn try_from(raw: RawSequence) -> Result<Self> {
        TokenSequenceScores::new(raw.vocab_size, raw.tokens, raw.observer, raw.performer)
    }
}

fn check_distribution(which: &str, pos: usize, dist: &[f64], vocab_size: usize) -> Result<()> {
    if dist.len() != vocab_size {
        return Err(Error::Contract(format!(
            "{which} distribution at position {pos} has {} entries, vocab_size is {vocab_size}",
            dist.len()
        )));
    }
    if let Some(p) = dist.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::Contract(format!("{which} distribution at position {pos} has invalid entry {p}")));
    }
    let mass: f64 = dist.iter().sum();
    if (mass - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::Contract(format!("{which} distribution at position {pos} sums to {mass}")));
    }
    Ok(())
}

impl TokenSequenceScores {
    pub fn new(vocab_size: usize, tokens: Vec<usize>, observer: Vec<Vec<f64>>, performer: Vec<Vec<f64>>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::Contract("sequence has no tokens".into()));
        }
        if observer.len() != tokens.len() || performer.len() != tokens.len() {
            return Err(Error::Contract(format!(
                "shape mismatch: {} tokens, {} observer rows, {} performer rows",
                tokens.len(),
                observer.len(),
                performer.len()
            )));
        }
        if let Some((i, t)) = tokens.iter().enumerate().find(|(_, t)| **t >= vocab_size) {
            return Err(Error::Contract(format!(
                "token {t} at position {i} out of range for vocab_size {vocab_size}"
            )));
        }
        for (i, (o, p)) in observer.iter().zip(&performer).enumerate() {
            check_distribution("observer", i, o, vocab_size)?;
            check_distribution("performer", i, p, vocab_size)?;
        }
        Ok(TokenSequenceScores {
            vocab_size,
            tokens,
            observer,
            performer,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[usize] {
        &self.tokens
    }

    pub fn observer(&self) -> &[Vec<f64>] {
        &self.observer
    }

    pub fn performer(&self) -> &[Vec<f64>] {
        &self.performer
    }
}

fn clamped_ln(p: f64) -> f64 {
    p.max(PROB_EPSILON).ln()
}

/// Neumaier-compensated sum; keeps short sums of equal terms exact.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean negative log-probability of the observed tokens under the observer.
pub fn log_perplexity(seq: &TokenSequenceScores) -> f64 {
    let total = compensated_sum(seq.tokens.iter().zip(&seq.observer).map(|(&t, dist)| -clamped_ln(dist[t])));
    total / seq.len() as f64
}

/// Mean per-position cross-entropy of the performer's distribution relative to
/// the observer's.
pub fn cross_perplexity(seq: &TokenSequenceScores) -> f64 {
    let per_position = seq.observer.iter().zip(&seq.performer).map(|(obs, perf)| {
        compensated_sum(
            obs.iter()
                .zip(perf)
                .filter(|(o, _)| **o > 0.0)
                .map(|(o, p)| -o * clamped_ln(*p)),
        )
    });
    compensated_sum(per_position) / seq.len() as f64
}

/// Ratio of log-perplexity to cross-perplexity. Lower values suggest machine text.
pub fn binoculars_score(seq: &TokenSequenceScores) -> Result<f64> {
    let x_ppl = cross_perplexity(seq);
    if x_ppl <= 0.0 {
        return Err(Error::DegenerateSequence(x_ppl));
    }
    Ok(log_perplexity(seq) / x_ppl)
}

/// Negated Binoculars score, so machine-generated text scores higher.
pub fn detector_score(seq: &TokenSequenceScores) -> Result<f64> {
    binoculars_score(seq).map(|b| -b)
}

/// All per-sequence outputs in one pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinocularsOutput {
    pub id: String,
    pub log_ppl: f64,
    pub x_ppl: f64,
    pub binoculars: f64,
    pub detector_score: f64,
}

pub fn score_sequence(id: &str, seq: &TokenSequenceScores) -> Result<BinocularsOutput> {
    let log_ppl = log_perplexity(seq);
    let x_ppl = cross_perplexity(seq);
    if x_ppl <= 0.0 {
        return Err(Error::DegenerateSequence(x_ppl));
    }
    let binoculars = log_ppl / x_ppl;
    Ok(BinocularsOutput {
        id: id.to_string(),
        log_ppl,
        x_ppl,
        binoculars,
        detector_score: -binoculars,
    })
}
