//! Scored detector outputs, record ingestion, and grouping.
//!
//! The positive class is always AI-generated text and the negative class is
//! human-written text. Every metric downstream consumes a [`ScoreSet`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Read};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Group identifier used when no grouping keys are requested.
pub const ALL_GROUP: &str = "all";
/// Attribute value substituted when a sample lacks a grouping key.
pub const UNKNOWN_VALUE: &str = "unknown";
/// Separator between attribute values in a composite group id.
pub const GROUP_SEPARATOR: &str = "/";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Positive => f.write_str("positive"),
            Label::Negative => f.write_str("negative"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample {
    pub id: String,
    pub score: f64,
    pub label: Label,
    #[serde(default)]
    pub attrs: BTreeMap<String, String>,
}

impl ScoredSample {
    pub fn new(id: impl Into<String>, score: f64, label: Label) -> Self {
        ScoredSample {
            id: id.into(),
            score,
            label,
            attrs: BTreeMap::new(),
        }
    }

    pub fn with_attr(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.attrs.insert(key.into(), value.into());
        self
    }
}

/// Scores partitioned by label. Both classes are non-empty and every score is
/// finite; the constructors enforce this.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    positives: Vec<(String, f64)>,
    negatives: Vec<(String, f64)>,
}

impl ScoreSet {
    pub fn new(positives: Vec<(String, f64)>, negatives: Vec<(String, f64)>) -> Result<Self> {
        if positives.is_empty() {
            return Err(Error::DegenerateSet(Label::Positive));
        }
        if negatives.is_empty() {
            return Err(Error::DegenerateSet(Label::Negative));
        }
        for (id, s) in positives.iter().chain(&negatives) {
            if !s.is_finite() {
                return Err(Error::value(format!("sample `{id}`"), format!("score {s} is not finite")));
            }
        }
        Ok(ScoreSet { positives, negatives })
    }

    /// Builds a set from bare scores; ids are `p000000`, `n000000`, ... so that
    /// ascending-id tie-breaks follow input order.
    pub fn from_scores(positives: &[f64], negatives: &[f64]) -> Result<Self> {
        let tag = |prefix: char, xs: &[f64]| -> Vec<(String, f64)> {
            xs.iter()
                .enumerate()
                .map(|(i, &s)| (format!("{prefix}{i:06}"), s))
                .collect()
        };
        Self::new(tag('p', positives), tag('n', negatives))
    }

    pub fn positives(&self) -> &[(String, f64)] {
        &self.positives
    }

    pub fn negatives(&self) -> &[(String, f64)] {
        &self.negatives
    }

    pub fn n_pos(&self) -> usize {
        self.positives.len()
    }

    pub fn n_neg(&self) -> usize {
        self.negatives.len()
    }

    pub fn positive_scores(&self) -> Vec<f64> {
        self.positives.iter().map(|(_, s)| *s).collect()
    }

    pub fn negative_scores(&self) -> Vec<f64> {
        self.negatives.iter().map(|(_, s)| *s).collect()
    }

    /// True when every score lies in `[0, 1]`.
    pub fn is_unit_interval(&self) -> bool {
        self.positives
            .iter()
            .chain(&self.negatives)
            .all(|(_, s)| (0.0..=1.0).contains(s))
    }

    /// Swaps the roles of the two classes.
    pub fn swapped(&self) -> ScoreSet {
        ScoreSet {
            positives: self.negatives.clone(),
            negatives: self.positives.clone(),
        }
    }

    /// Applies `f` to every score. Fails if the result is not finite.
    pub fn map_scores(&self, f: impl Fn(f64) -> f64) -> Result<ScoreSet> {
        let map = |xs: &[(String, f64)]| xs.iter().map(|(id, s)| (id.clone(), f(*s))).collect();
        ScoreSet::new(map(&self.positives), map(&self.negatives))
    }
}

/// Mapping from label text to [`Label`]. Lookups are case-insensitive and
/// ignore surrounding whitespace.
#[derive(Debug, Clone)]
pub struct LabelAliases {
    map: HashMap<String, Label>,
}

impl Default for LabelAliases {
    fn default() -> Self {
        let mut map = HashMap::new();
        for alias in ["ai", "1", "positive"] {
            map.insert(alias.to_string(), Label::Positive);
        }
        for alias in ["human", "0", "negative"] {
            map.insert(alias.to_string(), Label::Negative);
        }
        LabelAliases { map }
    }
}

impl LabelAliases {
    pub fn empty() -> Self {
        LabelAliases { map: HashMap::new() }
    }

    pub fn with(mut self, alias: &str, label: Label) -> Self {
        self.map.insert(alias.trim().to_lowercase(), label);
        self
    }

    pub fn resolve(&self, text: &str) -> Option<Label> {
        self.map.get(&text.trim().to_lowercase()).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFormat {
    Jsonl,
    Csv,
}

impl std::str::FromStr for RecordFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(RecordFormat::Jsonl),
            "csv" => Ok(RecordFormat::Csv),
            other => Err(Error::Config(format!("unknown record format `{other}`"))),
        }
    }
}

/// Reads scored records. Order is preserved and ids must be unique.
pub fn parse_samples<R: Read>(reader: R, format: RecordFormat, aliases: &LabelAliases) -> Result<Vec<ScoredSample>> {
    let samples = match format {
        RecordFormat::Jsonl => parse_jsonl(reader, aliases)?,
        RecordFormat::Csv => parse_csv(reader, aliases)?,
    };
    let mut seen = HashSet::with_capacity(samples.len());
    for s in &samples {
        if !seen.insert(s.id.as_str()) {
            return Err(Error::DuplicateId(s.id.clone()));
        }
    }
    Ok(samples)
}

fn parse_jsonl<R: Read>(reader: R, aliases: &LabelAliases) -> Result<Vec<ScoredSample>> {
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut obj: Map<String, Value> = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;

        let id = match obj.remove("id") {
            Some(Value::String(s)) => s,
            Some(Value::Number(n)) => n.to_string(),
            Some(_) => return Err(parse_err(line_no, "field `id` must be a string")),
            None => return Err(parse_err(line_no, "missing field `id`")),
        };
        let score = match obj.remove("score") {
            Some(Value::Number(n)) => n.as_f64().ok_or_else(|| parse_err(line_no, "score out of range"))?,
            Some(Value::String(s)) => parse_score_text(&s, line_no)?,
            Some(_) => return Err(parse_err(line_no, "field `score` must be a number")),
            None => return Err(parse_err(line_no, "missing field `score`")),
        };
        let label_text = match obj.remove("label") {
            Some(Value::String(s)) => s,
            Some(Value::Number(n)) => n.to_string(),
            Some(Value::Bool(b)) => u8::from(b).to_string(),
            Some(_) => return Err(parse_err(line_no, "field `label` must be a string")),
            None => return Err(parse_err(line_no, "missing field `label`")),
        };

        let attrs = obj
            .into_iter()
            .map(|(k, v)| {
                let text = match v {
                    Value::String(s) => s,
                    other => other.to_string(),
                };
                (k, text)
            })
            .collect();
        out.push(build_sample(id, score, &label_text, attrs, line_no, aliases)?);
    }
    Ok(out)
}

fn parse_csv<R: Read>(reader: R, aliases: &LabelAliases) -> Result<Vec<ScoredSample>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, &e.to_string()))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(1, &format!("missing column `{name}`")))
    };
    let (id_col, score_col, label_col) = (column("id")?, column("score")?, column("label")?);

    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            parse_err(line, &e.to_string())
        })?;
        let line_no = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let score = parse_score_text(&record[score_col], line_no)?;
        let attrs = headers
            .iter()
            .zip(record.iter())
            .enumerate()
            .filter(|(i, _)| ![id_col, score_col, label_col].contains(i))
            .map(|(_, (k, v))| (k.to_string(), v.to_string()))
            .collect();
        out.push(build_sample(
            record[id_col].to_string(),
            score,
            &record[label_col],
            attrs,
            line_no,
            aliases,
        )?);
    }
    Ok(out)
}

fn parse_err(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}

fn parse_score_text(text: &str, line: usize) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| Error::value(format!("line {line}"), format!("score `{text}` is not a number")))
}

fn build_sample(
    id: String,
    score: f64,
    label_text: &str,
    attrs: BTreeMap<String, String>,
    line: usize,
    aliases: &LabelAliases,
) -> Result<ScoredSample> {
    if id.is_empty() {
        return Err(parse_err(line, "empty id"));
    }
    if !score.is_finite() {
        return Err(Error::value(
            format!("line {line} (id `{id}`)"),
            format!("score {score} is not finite"),
        ));
    }
    let label = aliases.resolve(label_text).ok_or_else(|| Error::Label {
        line,
        value: label_text.to_string(),
    })?;
    Ok(ScoredSample { id, score, label, attrs })
}

/// Partitions samples by label, preserving input order within each class.
pub fn split_by_label(samples: &[ScoredSample]) -> Result<ScoreSet> {
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    for s in samples {
        let entry = (s.id.clone(), s.score);
        match s.label {
            Label::Positive => positives.push(entry),
            Label::Negative => negatives.push(entry),
        }
    }
    ScoreSet::new(positives, negatives)
}

/// A group that could not be evaluated because one class is absent.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedGroup {
    pub id: String,
    pub missing: Label,
    pub samples: Vec<ScoredSample>,
}

#[derive(Debug, Clone, Default)]
pub struct Grouping {
    pub groups: BTreeMap<String, ScoreSet>,
    pub skipped: Vec<SkippedGroup>,
}

/// Composite group id of `sample` for the given keys.
pub fn group_id(sample: &ScoredSample, keys: &[String]) -> String {
    if keys.is_empty() {
        return ALL_GROUP.to_string();
    }
    keys.iter()
        .map(|k| sample.attrs.get(k).map(String::as_str).unwrap_or(UNKNOWN_VALUE))
        .collect::<Vec<_>>()
        .join(GROUP_SEPARATOR)
}

/// Groups samples by the ordered values of `keys`. Groups lacking either class
/// are reported in [`Grouping::skipped`] rather than failing.
pub fn group_by(samples: &[ScoredSample], keys: &[String]) -> Grouping {
    let mut buckets: BTreeMap<String, Vec<ScoredSample>> = BTreeMap::new();
    for s in samples {
        buckets.entry(group_id(s, keys)).or_default().push(s.clone());
    }

    let mut out = Grouping::default();
    for (id, members) in buckets {
        match split_by_label(&members) {
            Ok(set) => {
                out.groups.insert(id, set);
            }
            Err(Error::DegenerateSet(missing)) => out.skipped.push(SkippedGroup {
                id,
                missing,
                samples: members,
            }),
            Err(e) => unreachable!("split of parsed samples failed: {e}"),
        }
    }
    out
}
