//! `pom-lite` command-line front end.

mod bench;
mod error;
mod estimate;
mod gradients;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "pom-lite", version, about = "Probability of maximality for Gaussian beliefs")]
struct Cli {
    /// Worker threads for data-parallel estimators and suites
    #[arg(long, global = true, env = "POM_LITE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate PoM for a belief file
    Estimate(EstimateArgs),
    /// Run a benchmark suite and write CSV results
    Bench(BenchArgs),
    /// Write the F-LITE Jacobians for a belief file
    Gradients(GradientArgs),
}

/// Exactly one of `--epsilon` and `--alpha`.
#[derive(Args, Debug, Clone, Copy)]
#[group(required = true, multiple = false)]
pub struct AccuracyArgs {
    /// Per-arm accuracy
    #[arg(long)]
    epsilon: Option<f64>,
    /// Accuracy as `ε = 1/(α·|X|)`
    #[arg(long)]
    alpha: Option<f64>,
}

impl AccuracyArgs {
    pub fn accuracy(&self) -> pom_lite::Accuracy {
        match (self.epsilon, self.alpha) {
            (Some(e), _) => pom_lite::Accuracy::Epsilon(e),
            (_, Some(a)) => pom_lite::Accuracy::Alpha(a),
            _ => unreachable!("clap enforces one of --epsilon/--alpha"),
        }
    }
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[arg(long, value_parser = parse_method)]
    method: pom_lite::Method,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    accuracy: AccuracyArgs,
    /// Seed for Monte Carlo methods (required for tsmc)
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Let tsmc sample from the diagonal when the file has no covariance
    #[arg(long)]
    allow_diag: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteName {
    Synthetic,
    Gp1d,
    Dropwave,
    Recall,
    EntropySearch,
    Runtime,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(value_enum)]
    suite: SuiteName,
    /// Domain sizes, e.g. 100,1000 or 1e4,1e5
    #[arg(long, value_delimiter = ',', value_parser = parse_size)]
    sizes: Option<Vec<usize>>,
    /// Number of seeds per size
    #[arg(long)]
    seeds: Option<u64>,
    /// Estimator accuracy `ε = 1/(α·|X|)`
    #[arg(long)]
    alpha: Option<f64>,
    /// Estimators to run, e.g. flite,alite
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    methods: Option<Vec<pom_lite::Method>>,
    /// Belief family for synthetic instances
    #[arg(long, default_value = "main")]
    family: String,
    /// BO steps (gp1d, dropwave, entropy-search)
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct GradientArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Only flite has closed-form gradients
    #[arg(long, value_parser = parse_method, default_value = "flite")]
    method: pom_lite::Method,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
}

fn parse_method(s: &str) -> Result<pom_lite::Method, String> {
    s.parse().map_err(|e: pom_lite::types::UnknownMethod| e.to_string())
}

fn parse_size(s: &str) -> Result<usize, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.fract() != 0.0 || !(2.0..=1e9).contains(&v) {
        return Err(format!("`{s}` is not a domain size"));
    }
    Ok(v as usize)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))?;
    }
    match cli.command {
        Command::Estimate(a) => estimate::run(&a),
        Command::Bench(a) => bench::run(&a),
        Command::Gradients(a) => gradients::run(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
