use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use serde::{Deserialize, Serialize};
use xrisk_core::binoculars::{score_sequence, TokenSequenceScores};
use xrisk_core::corpus::{quality_report, MixcasePlanner, QualityConfig};
use xrisk_core::dxo::{read_feature_csv, train, DxoConfig, Scorer, ScorerKind, TrainMode};
use xrisk_core::thresholds::{
    deployment_report, fixed_threshold, threshold_at_max_fpr, threshold_at_min_precision, write_deployment_csv,
    ThresholdChoice,
};
use xrisk_core::xrisk::ReportRow;
use xrisk_core::{
    evaluate, group_by, parse_samples, rank_reports, split_by_label, LabelAliases, RecordFormat, ScoreSet,
    ScoredSample, XRiskParams,
};

use crate::io::{open_input, open_output, read_to_string, write_json_pretty, write_jsonl};
use crate::{
    Command, DeployArgs, EvaluateArgs, InputFormat, IoArgs, MixcaseArgs, Mode, Preset, QualityArgs, RankArgs,
    ScorerArg, ScoresArgs, ThresholdArgs, TrainArgs,
};

/// A bad invocation that clap itself cannot detect.
#[derive(Debug)]
pub struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// 1 for usage and configuration problems, 2 for everything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<xrisk_core::Error>() {
            return match e {
                xrisk_core::Error::InvalidParams(_) | xrisk_core::Error::Config(_) => 1,
                _ => 2,
            };
        }
    }
    2
}

/// Parses a fraction, reading values above 1 as percentages.
pub fn percent(text: &str) -> std::result::Result<f64, String> {
    let v: f64 = text.trim().parse().map_err(|_| format!("`{text}` is not a number"))?;
    if !v.is_finite() || v < 0.0 {
        return Err(format!("`{text}` must be a non-negative number"));
    }
    Ok(if v > 1.0 { v / 100.0 } else { v })
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Rank(a) => cmd_rank(a),
        Command::Threshold(a) => cmd_threshold(a),
        Command::Deploy(a) => cmd_deploy(a),
        Command::TrainDxo(a) => cmd_train(a),
        Command::Binoculars(a) => cmd_binoculars(a),
        Command::Quality(a) => cmd_quality(a),
        Command::MixcasePlan(a) => cmd_mixcase(a),
    }
}

fn read_samples(args: &ScoresArgs) -> Result<Vec<ScoredSample>> {
    let path = &args.io.input;
    let format = match args.format {
        Some(InputFormat::Csv) => RecordFormat::Csv,
        Some(InputFormat::Jsonl) => RecordFormat::Jsonl,
        None if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => RecordFormat::Csv,
        None => RecordFormat::Jsonl,
    };
    parse_samples(open_input(path)?, format, &LabelAliases::default())
        .with_context(|| format!("reading scores from `{}`", path.display()))
}

fn read_score_set(args: &ScoresArgs) -> Result<ScoreSet> {
    Ok(split_by_label(&read_samples(args)?)?)
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let base = match a.preset {
        Preset::Standard => XRiskParams::standard(),
        Preset::Adversarial => XRiskParams::adversarial(),
    };
    let params = XRiskParams::new(a.alpha.unwrap_or(base.alpha()), a.beta.unwrap_or(base.beta()))?;
    let samples = read_samples(&a.scores)?;
    let grouping = group_by(&samples, &a.group_by);
    for s in &grouping.skipped {
        eprintln!(
            "skipping group `{}`: no {} samples ({} records)",
            s.id,
            s.missing,
            s.samples.len()
        );
    }
    if grouping.groups.is_empty() {
        return Err(anyhow!("no group contains both positive and negative samples"));
    }
    let rows = grouping.groups.iter().map(|(id, set)| evaluate(set, &params).to_row(id));
    write_jsonl(&a.scores.io.output, rows)
}

fn read_report_rows(path: &Path) -> Result<Vec<ReportRow>> {
    read_to_string(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).with_context(|| format!("`{}` line {}: not a report row", path.display(), i + 1))
        })
        .collect()
}

fn cmd_rank(a: RankArgs) -> Result<()> {
    let mut named = Vec::new();
    for spec in &a.reports {
        let (label, path) = match spec.split_once('=') {
            Some((label, path)) if !Path::new(spec).exists() => (Some(label), PathBuf::from(path)),
            _ => (None, PathBuf::from(spec)),
        };
        let rows = read_report_rows(&path)?;
        let single = rows.len() == 1;
        for mut row in rows {
            if let Some(label) = label {
                row.name = if single { label.to_string() } else { format!("{label}/{}", row.name) };
            }
            named.push(row.into_named_report()?);
        }
    }
    let ranked = rank_reports(named)?;
    write_jsonl(&a.output, ranked.iter().map(|(name, r)| r.to_row(name)))
}

fn cmd_threshold(a: ThresholdArgs) -> Result<()> {
    if a.max_fpr.is_empty() && a.min_precision.is_empty() && a.fixed.is_empty() {
        return Err(UsageError("give at least one of --max-fpr, --min-precision, --fixed".into()).into());
    }
    let set = read_score_set(&a.scores)?;
    let mut choices: Vec<ThresholdChoice> = Vec::new();
    for &beta in &a.max_fpr {
        choices.push(threshold_at_max_fpr(&set, beta)?);
    }
    for &p in &a.min_precision {
        choices.push(threshold_at_min_precision(&set, p)?);
    }
    for &t in &a.fixed {
        choices.push(fixed_threshold(&set, t)?);
    }
    write_json_pretty(&a.scores.io.output, &choices)
}

fn cmd_deploy(a: DeployArgs) -> Result<()> {
    let choices: Vec<ThresholdChoice> = serde_json::from_str(&read_to_string(&a.choices)?)
        .with_context(|| format!("`{}` is not a threshold choice array", a.choices.display()))?;
    let set = read_score_set(&a.scores)?;
    let rows = deployment_report(&choices, &set);
    let mut out = open_output(&a.scores.io.output)?;
    write_deployment_csv(&rows, &mut out)?;
    std::io::Write::flush(&mut out)?;
    Ok(())
}

fn train_config(a: &TrainArgs) -> Result<DxoConfig> {
    let mut cfg = DxoConfig::default();
    if let Some(path) = &a.config {
        cfg.apply_kv(&read_to_string(path)?)
            .with_context(|| format!("config `{}`", path.display()))?;
    }
    if let Some(o) = &a.objective {
        cfg.objective = o.parse()?;
    }
    let set = |slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut cfg.lambda, a.lambda);
    set(&mut cfg.lambda_prime, a.lambda_prime);
    set(&mut cfg.margin, a.margin);
    set(&mut cfg.learning_rate, a.learning_rate);
    set(&mut cfg.sampling_rate, a.sampling_rate);
    set(&mut cfg.ma_gamma, a.ma_gamma);
    cfg.epochs = a.epochs.unwrap_or(cfg.epochs);
    cfg.batch_size = a.batch_size.unwrap_or(cfg.batch_size);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let cfg = train_config(&a)?;
    let aliases = LabelAliases::default();
    let data = read_feature_csv(open_input(&a.io.input)?, &aliases)
        .with_context(|| format!("reading features from `{}`", a.io.input.display()))?;
    let validation = match &a.validation {
        Some(p) => Some(
            read_feature_csv(open_input(p)?, &aliases).with_context(|| format!("reading `{}`", p.display()))?,
        ),
        None => None,
    };
    let init = match &a.init {
        Some(p) => serde_json::from_str::<Scorer>(&read_to_string(p)?)
            .with_context(|| format!("`{}` is not a scorer", p.display()))?,
        None => {
            let kind = match a.scorer {
                ScorerArg::Linear => ScorerKind::Linear,
                ScorerArg::Mlp1 => ScorerKind::Mlp1,
            };
            if kind == ScorerKind::Mlp1 && a.hidden == 0 {
                return Err(UsageError("--hidden must be positive for mlp1".into()).into());
            }
            Scorer::init(kind, data.dim(), a.hidden, cfg.seed)
        }
    };
    let mode = match a.mode {
        Mode::FullBatch => TrainMode::FullBatch,
        Mode::MiniBatch => TrainMode::MiniBatch,
    };
    let result = train(&data, &cfg, mode, init, validation.as_ref())?;
    write_json_pretty(&a.io.output, &result)
}

fn record_id(value: &serde_json::Value, index: usize) -> String {
    match value.get("id") {
        Some(serde_json::Value::String(s)) => s.clone(),
        Some(serde_json::Value::Number(n)) => n.to_string(),
        _ => index.to_string(),
    }
}

fn cmd_binoculars(a: IoArgs) -> Result<()> {
    let text = read_to_string(&a.input)?;
    let mut rows = Vec::new();
    for (i, value) in serde_json::Deserializer::from_str(&text).into_iter::<serde_json::Value>().enumerate() {
        let value = value.with_context(|| format!("record {}: invalid JSON", i + 1))?;
        let id = record_id(&value, i);
        let seq: TokenSequenceScores = serde_json::from_value(value).with_context(|| format!("record `{id}`"))?;
        rows.push(score_sequence(&id, &seq).with_context(|| format!("record `{id}`"))?);
    }
    write_jsonl(&a.output, rows)
}

#[derive(Deserialize)]
struct TextRecord {
    id: serde_json::Value,
    text: String,
}

#[derive(Serialize)]
struct QualityLine {
    id: serde_json::Value,
    pass: bool,
    failed_checks: Vec<String>,
}

fn cmd_quality(a: QualityArgs) -> Result<()> {
    let cfg: QualityConfig = match &a.config {
        Some(p) => serde_json::from_str(&read_to_string(p)?).with_context(|| format!("config `{}`", p.display()))?,
        None => QualityConfig::default(),
    };
    cfg.validate()?;
    let text = read_to_string(&a.io.input)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let rec: TextRecord = serde_json::from_str(line).with_context(|| format!("line {}", i + 1))?;
        let report = quality_report(&rec.text, &cfg);
        rows.push(QualityLine {
            id: rec.id,
            pass: report.pass,
            failed_checks: report.failed_checks().into_iter().map(String::from).collect(),
        });
    }
    write_jsonl(&a.io.output, rows)
}

fn cmd_mixcase(a: MixcaseArgs) -> Result<()> {
    let text = read_to_string(&a.io.input)?;
    let lengths = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<usize>()
                .with_context(|| format!("line {}: `{}` is not a token count", i + 1, l.trim()))
        })
        .collect::<Result<Vec<usize>>>()?;
    let planner = MixcasePlanner::new(&lengths)?;
    write_jsonl(&a.io.output, planner.plans(a.seed).take(a.count))
}
