use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod io;

#[derive(Parser, Debug)]
#[command(name = "xrisk", version, about = "Evaluate, calibrate and train AI-text detectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-group tpAUC / pAUC / AUC / AP from a scores file.
    Evaluate(EvaluateArgs),
    /// Orders report rows from one or more evaluate outputs.
    Rank(RankArgs),
    /// Picks thresholds on development scores.
    Threshold(ThresholdArgs),
    /// Re-evaluates chosen thresholds on deployment scores (CSV out).
    Deploy(DeployArgs),
    /// Trains a scorer on a feature CSV by pAUC / tpAUC optimization.
    TrainDxo(TrainArgs),
    /// Binoculars scores from per-token distributions.
    Binoculars(IoArgs),
    /// Heuristic and repetition quality checks on `{id, text}` JSONL.
    Quality(QualityArgs),
    /// Draws mixcase lengths (T, H, N) from observed token counts.
    MixcasePlan(MixcaseArgs),
}

#[derive(Args, Debug)]
struct IoArgs {
    /// Input path, `-` for stdin.
    #[arg(long, short, default_value = "-")]
    input: PathBuf,
    /// Output path, `-` for stdout.
    #[arg(long, short, default_value = "-")]
    output: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Preset {
    /// α = 0.50, β = 0.05
    Standard,
    /// α = 0.40, β = 0.30
    Adversarial,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum InputFormat {
    Jsonl,
    Csv,
}

#[derive(Args, Debug)]
struct ScoresArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Record format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<InputFormat>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[command(flatten)]
    scores: ScoresArgs,
    /// TPR lower bound for tpAUC (0.5 or 50).
    #[arg(long, value_parser = commands::percent)]
    alpha: Option<f64>,
    /// FPR upper bound for pAUC / tpAUC (0.05 or 5).
    #[arg(long, value_parser = commands::percent)]
    beta: Option<f64>,
    #[arg(long, value_enum, default_value = "standard")]
    preset: Preset,
    /// Attribute to group by; repeat for composite groups.
    #[arg(long = "group-by", value_name = "KEY")]
    group_by: Vec<String>,
}

#[derive(Args, Debug)]
struct RankArgs {
    /// Report files, optionally as `NAME=PATH`.
    #[arg(required = true)]
    reports: Vec<String>,
    #[arg(long, short, default_value = "-")]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    #[command(flatten)]
    scores: ScoresArgs,
    /// Highest-TPR threshold with FPR at most this value.
    #[arg(long = "max-fpr", value_parser = commands::percent)]
    max_fpr: Vec<f64>,
    /// Highest-recall threshold with precision at least this value.
    #[arg(long = "min-precision", value_parser = commands::percent)]
    min_precision: Vec<f64>,
    /// Fixed threshold on the raw score scale.
    #[arg(long, allow_negative_numbers = true)]
    fixed: Vec<f64>,
}

#[derive(Args, Debug)]
struct DeployArgs {
    #[command(flatten)]
    scores: ScoresArgs,
    /// JSON array written by `threshold`.
    #[arg(long)]
    choices: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Mode {
    FullBatch,
    MiniBatch,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ScorerArg {
    Linear,
    Mlp1,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Feature CSV scored for validation tpAUC in the history.
    #[arg(long)]
    validation: Option<PathBuf>,
    /// `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scorer JSON to start from instead of the default initialization.
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "full-batch")]
    mode: Mode,
    #[arg(long, value_enum, default_value = "linear")]
    scorer: ScorerArg,
    /// Hidden units for `mlp1`.
    #[arg(long, default_value_t = 16)]
    hidden: usize,
    #[arg(long)]
    objective: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long = "lambda-prime")]
    lambda_prime: Option<f64>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long = "lr")]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long = "batch-size")]
    batch_size: Option<usize>,
    #[arg(long = "sampling-rate")]
    sampling_rate: Option<f64>,
    #[arg(long = "ma-gamma")]
    ma_gamma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct QualityArgs {
    #[command(flatten)]
    io: IoArgs,
    /// JSON object overriding default thresholds.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MixcaseArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of plans to draw.
    #[arg(long, default_value_t = 1)]
    count: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
