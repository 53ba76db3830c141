use std::collections::HashSet;
use std::io::Read;

use crate::data::{Label, LabelAliases, ScoreSet};
use crate::error::{Error, Result};

use super::scorer::Scorer;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSample {
    pub id: String,
    pub features: Vec<f64>,
    pub label: Label,
}

impl FeatureSample {
    pub fn new(id: impl Into<String>, features: Vec<f64>, label: Label) -> Self {
        FeatureSample {
            id: id.into(),
            features,
            label,
        }
    }
}

/// Feature vectors of a common dimension with unique ids. A dataset may hold a
/// single class; objectives and trainers reject that case.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDataset {
    samples: Vec<FeatureSample>,
    dim: usize,
    positives: Vec<usize>,
    negatives: Vec<usize>,
}

impl FeatureDataset {
    pub fn new(samples: Vec<FeatureSample>) -> Result<Self> {
        let dim = samples
            .first()
            .map(|s| s.features.len())
            .ok_or_else(|| Error::Config("feature dataset is empty".into()))?;
        if dim == 0 {
            return Err(Error::Config("feature vectors must be non-empty".into()));
        }
        let mut ids = HashSet::with_capacity(samples.len());
        let (mut positives, mut negatives) = (Vec::new(), Vec::new());
        for (i, s) in samples.iter().enumerate() {
            if s.features.len() != dim {
                return Err(Error::value(
                    format!("sample `{}`", s.id),
                    format!("has {} features, expected {dim}", s.features.len()),
                ));
            }
            if let Some(v) = s.features.iter().find(|v| !v.is_finite()) {
                return Err(Error::value(format!("sample `{}`", s.id), format!("feature value {v} is not finite")));
            }
            if !ids.insert(s.id.as_str()) {
                return Err(Error::DuplicateId(s.id.clone()));
            }
            match s.label {
                Label::Positive => positives.push(i),
                Label::Negative => negatives.push(i),
            }
        }
        Ok(FeatureDataset {
            samples,
            dim,
            positives,
            negatives,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[FeatureSample] {
        &self.samples
    }

    pub fn sample(&self, index: usize) -> &FeatureSample {
        &self.samples[index]
    }

    /// Indices of positive samples, in input order.
    pub fn positives(&self) -> &[usize] {
        &self.positives
    }

    /// Indices of negative samples, in input order.
    pub fn negatives(&self) -> &[usize] {
        &self.negatives
    }

    pub(crate) fn require_both_classes(&self) -> Result<()> {
        if self.positives.is_empty() {
            return Err(Error::DegenerateSet(Label::Positive));
        }
        if self.negatives.is_empty() {
            return Err(Error::DegenerateSet(Label::Negative));
        }
        Ok(())
    }

    /// Scores every sample with `scorer`.
    pub fn score_set(&self, scorer: &Scorer) -> Result<ScoreSet> {
        let score = |idx: &[usize]| -> Vec<(String, f64)> {
            idx.iter()
                .map(|&i| (self.samples[i].id.clone(), scorer.score(&self.samples[i].features)))
                .collect()
        };
        ScoreSet::new(score(&self.positives), score(&self.negatives))
    }
}

/// Reads `id,label,f0,f1,...` CSV. Every column after `label` is a feature.
pub fn read_feature_csv<R: Read>(reader: R, aliases: &LabelAliases) -> Result<FeatureDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.len() < 3 || &headers[0] != "id" || &headers[1] != "label" {
        return Err(Error::Parse {
            line: 1,
            message: "header must be `id,label,f0,f1,...`".into(),
        });
    }

    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let label = aliases.resolve(&record[1]).ok_or_else(|| Error::Label {
            line,
            value: record[1].to_string(),
        })?;
        let features = record
            .iter()
            .skip(2)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::value(format!("line {line}"), format!("feature `{v}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        samples.push(FeatureSample::new(&record[0], features, label));
    }
    FeatureDataset::new(samples)
}
