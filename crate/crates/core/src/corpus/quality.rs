use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stop words counted by the `stop_words` check.
pub const STOP_WORDS: [&str; 8] = ["the", "be", "to", "of", "and", "that", "have", "with"];

/// Which repeated n-grams count towards [`duplicate_ngram_char_fraction`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NgramMode {
    /// Only the most frequent n-gram.
    Top,
    /// Every n-gram seen more than once.
    All,
}

fn non_empty_lines(text: &str) -> impl Iterator<Item = &str> {
    text.split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .filter(|l| !l.trim().is_empty())
}

fn repeat_fraction<'a>(items: impl Iterator<Item = &'a str>) -> f64 {
    let mut seen = HashSet::new();
    let (mut total, mut repeats) = (0usize, 0usize);
    for item in items {
        total += 1;
        if !seen.insert(item) {
            repeats += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        repeats as f64 / total as f64
    }
}

/// Fraction of non-empty lines that repeat an earlier line exactly.
pub fn duplicate_line_fraction(text: &str) -> f64 {
    repeat_fraction(non_empty_lines(text))
}

/// Splits on runs of blank lines.
fn paragraphs(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)) {
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.push(current.join("\n"));
                current.clear();
            }
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        out.push(current.join("\n"));
    }
    out
}

/// Fraction of paragraphs (blocks separated by blank lines) that repeat an
/// earlier paragraph exactly.
pub fn duplicate_paragraph_fraction(text: &str) -> f64 {
    let paras = paragraphs(text);
    repeat_fraction(paras.iter().map(String::as_str))
}

/// Whitespace-separated words with their character spans `[start, end)`.
fn words_with_spans(text: &str) -> (Vec<&str>, Vec<(usize, usize)>, usize) {
    let (mut words, mut spans) = (Vec::new(), Vec::new());
    let mut start: Option<(usize, usize)> = None;
    let mut n_chars = 0;
    for (ci, (bi, ch)) in text.char_indices().enumerate() {
        n_chars = ci + 1;
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some((bi, ci)),
            (true, Some((b0, c0))) => {
                words.push(&text[b0..bi]);
                spans.push((c0, ci));
                start = None;
            }
            _ => {}
        }
    }
    if let Some((b0, c0)) = start {
        words.push(&text[b0..]);
        spans.push((c0, n_chars));
    }
    (words, spans, n_chars)
}

/// Share of the text's characters covered by repeated word n-grams.
///
/// An occurrence covers the characters from the start of its first word to
/// the end of its last word. Only occurrences after the first one of each
/// n-gram count, and overlapping occurrences are counted once. Texts with
/// fewer than `n` words score 0.
///
/// # Panics
/// If `n` is zero.
pub fn duplicate_ngram_char_fraction(text: &str, n: usize, mode: NgramMode) -> f64 {
    assert!(n > 0, "n-gram length must be positive");
    let (words, spans, n_chars) = words_with_spans(text);
    if words.len() < n || n_chars == 0 {
        return 0.0;
    }

    let mut positions: HashMap<&[&str], Vec<usize>> = HashMap::new();
    for (i, gram) in words.windows(n).enumerate() {
        positions.entry(gram).or_default().push(i);
    }
    let repeated: Vec<&Vec<usize>> = match mode {
        NgramMode::Top => positions
            .values()
            .filter(|p| p.len() > 1)
            .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
            .into_iter()
            .collect(),
        NgramMode::All => positions.values().filter(|p| p.len() > 1).collect(),
    };

    let mut covered = vec![false; n_chars];
    for occurrences in repeated {
        for &i in &occurrences[1..] {
            let (from, to) = (spans[i].0, spans[i + n - 1].1);
            covered[from..to].iter_mut().for_each(|c| *c = true);
        }
    }
    covered.iter().filter(|&&c| c).count() as f64 / n_chars as f64
}

/// Thresholds for [`quality_report`]. Every field can be overridden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QualityConfig {
    pub min_words: usize,
    pub max_words: usize,
    pub min_mean_word_length: f64,
    pub max_mean_word_length: f64,
    /// Cap on (`#` + ellipsis count) / word count.
    pub max_symbol_word_ratio: f64,
    pub min_alpha_word_fraction: f64,
    /// Minimum number of distinct [`STOP_WORDS`] present.
    pub min_stop_words: usize,
    pub max_duplicate_line_fraction: f64,
    pub max_duplicate_paragraph_fraction: f64,
    /// `(n, cap)` for the top repeated n-gram.
    pub top_ngram_caps: Vec<(usize, f64)>,
    /// `(n, cap)` for all repeated n-grams.
    pub all_ngram_caps: Vec<(usize, f64)>,
}

impl Default for QualityConfig {
    fn default() -> Self {
        QualityConfig {
            min_words: 50,
            max_words: 100_000,
            min_mean_word_length: 3.0,
            max_mean_word_length: 10.0,
            max_symbol_word_ratio: 0.10,
            min_alpha_word_fraction: 0.80,
            min_stop_words: 2,
            max_duplicate_line_fraction: 0.30,
            max_duplicate_paragraph_fraction: 0.30,
            top_ngram_caps: vec![(2, 0.20), (3, 0.18), (4, 0.16)],
            all_ngram_caps: vec![(5, 0.15), (6, 0.14), (7, 0.13), (8, 0.12), (9, 0.11), (10, 0.10)],
        }
    }
}

impl QualityConfig {
    pub fn validate(&self) -> Result<()> {
        let fraction = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be in [0, 1], got {v}")))
            }
        };
        if self.min_words > self.max_words {
            return Err(Error::Config("min_words exceeds max_words".into()));
        }
        if self.min_mean_word_length.is_nan()
            || self.max_mean_word_length.is_nan()
            || self.min_mean_word_length > self.max_mean_word_length
        {
            return Err(Error::Config("min_mean_word_length exceeds max_mean_word_length".into()));
        }
        fraction("max_symbol_word_ratio", self.max_symbol_word_ratio)?;
        fraction("min_alpha_word_fraction", self.min_alpha_word_fraction)?;
        fraction("max_duplicate_line_fraction", self.max_duplicate_line_fraction)?;
        fraction("max_duplicate_paragraph_fraction", self.max_duplicate_paragraph_fraction)?;
        for &(n, cap) in self.top_ngram_caps.iter().chain(&self.all_ngram_caps) {
            if n == 0 {
                return Err(Error::Config("n-gram length must be positive".into()));
            }
            fraction(&format!("{n}-gram cap"), cap)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityCheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl QualityCheck {
    fn new(name: impl Into<String>, value: f64, threshold: f64, bound: Bound) -> Self {
        let pass = match bound {
            Bound::Min => value >= threshold,
            Bound::Max => value <= threshold,
        };
        QualityCheck {
            name: name.into(),
            value,
            threshold,
            bound,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub checks: Vec<QualityCheck>,
    pub pass: bool,
}

impl QualityReport {
    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }
}

fn symbol_count(word: &str) -> usize {
    word.matches('#').count() + word.matches("...").count() + word.matches('…').count()
}

/// Runs every check in `cfg` on `text`.
pub fn quality_report(text: &str, cfg: &QualityConfig) -> QualityReport {
    let words: Vec<&str> = text.split_whitespace().collect();
    let n_words = words.len();
    let per_word = |count: usize| if n_words == 0 { 0.0 } else { count as f64 / n_words as f64 };

    let total_len: usize = words.iter().map(|w| w.chars().count()).sum();
    let symbols: usize = words.iter().map(|w| symbol_count(w)).sum();
    let alpha = words.iter().filter(|w| w.chars().any(char::is_alphabetic)).count();
    let stop: HashSet<String> = words
        .iter()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| STOP_WORDS.contains(&w.as_str()))
        .collect();

    let mut checks = vec![
        QualityCheck::new("word_count_min", n_words as f64, cfg.min_words as f64, Bound::Min),
        QualityCheck::new("word_count_max", n_words as f64, cfg.max_words as f64, Bound::Max),
        QualityCheck::new("mean_word_length_min", per_word(total_len), cfg.min_mean_word_length, Bound::Min),
        QualityCheck::new("mean_word_length_max", per_word(total_len), cfg.max_mean_word_length, Bound::Max),
        QualityCheck::new("symbol_word_ratio", per_word(symbols), cfg.max_symbol_word_ratio, Bound::Max),
        QualityCheck::new("alpha_word_fraction", per_word(alpha), cfg.min_alpha_word_fraction, Bound::Min),
        QualityCheck::new("stop_words", stop.len() as f64, cfg.min_stop_words as f64, Bound::Min),
        QualityCheck::new(
            "duplicate_line_fraction",
            duplicate_line_fraction(text),
            cfg.max_duplicate_line_fraction,
            Bound::Max,
        ),
        QualityCheck::new(
            "duplicate_paragraph_fraction",
            duplicate_paragraph_fraction(text),
            cfg.max_duplicate_paragraph_fraction,
            Bound::Max,
        ),
    ];
    for &(n, cap) in &cfg.top_ngram_caps {
        let v = duplicate_ngram_char_fraction(text, n, NgramMode::Top);
        checks.push(QualityCheck::new(format!("top_{n}gram_char_fraction"), v, cap, Bound::Max));
    }
    for &(n, cap) in &cfg.all_ngram_caps {
        let v = duplicate_ngram_char_fraction(text, n, NgramMode::All);
        checks.push(QualityCheck::new(format!("dup_{n}gram_char_fraction"), v, cap, Bound::Max));
    }
    let pass = checks.iter().all(|c| c.pass);
    QualityReport { checks, pass }
}
