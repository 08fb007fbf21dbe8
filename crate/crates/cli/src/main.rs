//! `abl`: generate equation datasets, train and evaluate abductive
//! learners, and summarise training logs.

mod commands;
mod manifest;
mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit status 1: bad flags or unusable inputs.
/// Exit status 2: the command itself failed.
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Failed(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Failed(m) => write!(f, "failed: {m}"),
        }
    }
}

pub fn invalid(m: impl std::fmt::Display) -> CliError {
    CliError::Invalid(m.to_string())
}

pub fn failed(m: impl std::fmt::Display) -> CliError {
    CliError::Failed(m.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "abl", version, about = "Abductive learning experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a labeled equation image dataset.
    GenData(GenDataArgs),
    /// Train a model bundle on a dataset.
    Train(TrainArgs),
    /// Per-length accuracy of a model on a dataset.
    Eval(EvalArgs),
    /// Summary tables from training logs and evaluation CSVs.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct GenDataArgs {
    /// `add` or `xor`.
    #[arg(long, default_value = "add")]
    pub semantics: String,
    /// `easy` or `hard`.
    #[arg(long, default_value = "easy")]
    pub glyphs: String,
    /// Comma-separated lengths or inclusive ranges, e.g. `5..8` or `5,7`.
    #[arg(long, default_value = "5..8")]
    pub lengths: String,
    #[arg(long, default_value_t = 300)]
    pub per_length: usize,
    #[arg(long, default_value_t = 0.5)]
    pub positive_fraction: f64,
    /// Overrides the family's pixel noise.
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    /// Seed for equation sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seed for image rendering; defaults to `seed`.
    #[arg(long)]
    pub glyph_seed: Option<u64>,
    #[arg(long)]
    pub out: std::path::PathBuf,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: std::path::PathBuf,
    #[arg(long, default_value_t = 120)]
    pub iters: usize,
    /// Subsample size range `A..B`.
    #[arg(long, default_value = "5..10")]
    pub subsample: String,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Feature buffer capacity.
    #[arg(long, default_value_t = 20)]
    pub features: usize,
    /// Comma-separated stage length caps.
    #[arg(long, default_value = "5,6,7,8")]
    pub curriculum: String,
    #[arg(long, default_value_t = 9)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0.8)]
    pub accept_accuracy: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep the perception of `--from` fixed.
    #[arg(long, conflicts_with = "freeze_knowledge", requires = "from")]
    pub freeze_perception: bool,
    /// Keep the features and decision network of `--from` fixed.
    #[arg(long, requires = "from")]
    pub freeze_knowledge: bool,
    /// Source model bundle for transfer.
    #[arg(long)]
    pub from: Option<std::path::PathBuf>,
    /// Probe images per symbol for logging perception accuracy; 0 disables.
    #[arg(long, default_value_t = 50)]
    pub probe_per_class: usize,
    #[arg(long, default_value_t = 5000)]
    pub probe_seed: u64,
    #[arg(long)]
    pub out: std::path::PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: std::path::PathBuf,
    #[arg(long)]
    pub data: std::path::PathBuf,
    #[arg(long)]
    pub out: std::path::PathBuf,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Training log CSV; repeat to compare runs.
    #[arg(long = "log", required = true)]
    pub logs: Vec<std::path::PathBuf>,
    /// Evaluation CSV written by `abl eval`; repeatable.
    #[arg(long = "eval")]
    pub evals: Vec<std::path::PathBuf>,
    /// Output directory for the tables.
    #[arg(long)]
    pub out: std::path::PathBuf,
}

fn init_threads() -> Result<usize, CliError> {
    let threads = match std::env::var("ABL_THREADS") {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| invalid(format!("ABL_THREADS must be a positive integer, got {v:?}")))?,
        Err(_) => 1,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(failed)?;
    Ok(threads)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = init_threads().and_then(|threads| match cli.command {
        Command::GenData(a) => commands::gen_data(&a, threads),
        Command::Train(a) => commands::train(&a, threads),
        Command::Eval(a) => commands::eval(&a, threads),
        Command::Report(a) => report::report(&a, threads),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("abl: {e}");
            ExitCode::from(e.code())
        }
    }
}
