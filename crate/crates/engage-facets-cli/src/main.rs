//! Command-line front end for the engagement facet pipeline.
//!
//! Subcommands: `generate` (synthetic corpus), `extract` (feature+label
//! CSVs), `evaluate` (balance + cross-validate + reports), and `metrics`
//! (standalone confusion-matrix metrics).
//!
//! Exit codes: 0 success, 1 usage/validation, 2 I/O, 3 numerical failure.
//! Set `ENGAGE_FACETS_LOG` to control log verbosity.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;

/// An error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }
}

#[derive(Parser)]
#[command(
    name = "engage-facets",
    about = "Engagement facet classification pipeline",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Plain-text key-value config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed for generation, balancing, folds, and training.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Discretization frame rate in Hz.
    #[arg(long = "frame-rate", global = true)]
    frame_rate: Option<f64>,

    /// Number of cross-validation folds.
    #[arg(long, global = true)]
    k: Option<usize>,

    /// Classifier to evaluate (repeatable); default is all four.
    #[arg(long = "classifier", global = true)]
    classifiers: Vec<String>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Input directory.
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Keyword configuration file (TSV: cue_kind <TAB> token).
    #[arg(long, global = true)]
    keywords: Option<PathBuf>,

    /// Number of interactions to generate.
    #[arg(long = "n-interactions", global = true)]
    n_interactions: Option<usize>,

    /// Length of each generated interaction in milliseconds.
    #[arg(long = "duration-ms", global = true)]
    duration_ms: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic annotated corpus (tier files + ground truth).
    Generate,
    /// Extract per-participant feature+label CSVs from tier files.
    Extract,
    /// Balance, cross-validate all selected classifiers, write reports.
    Evaluate,
    /// Compute class metrics from a 3x3 confusion matrix CSV.
    Metrics {
        /// CSV file with 3 rows of 3 non-negative integers
        /// (rows = predicted, columns = actual).
        #[arg(long)]
        matrix: PathBuf,
    },
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        config.apply_file(&text, &path.display().to_string())?;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(rate) = cli.frame_rate {
        config.frame_rate_hz = rate;
    }
    if let Some(k) = cli.k {
        config.k = k;
    }
    if !cli.classifiers.is_empty() {
        config.classifiers = cli
            .classifiers
            .iter()
            .map(|t| t.parse().map_err(|e| CliError::usage(format!("{e}"))))
            .collect::<Result<_, _>>()?;
    }
    if let Some(out) = &cli.out {
        config.out = Some(out.clone());
    }
    if let Some(input) = &cli.input {
        config.input = Some(input.clone());
    }
    if let Some(keywords) = &cli.keywords {
        config.keywords_path = Some(keywords.clone());
    }
    if let Some(n) = cli.n_interactions {
        config.n_interactions = n;
    }
    if let Some(d) = cli.duration_ms {
        config.duration_ms = d;
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Metrics { matrix } => commands::cmd_metrics(matrix),
        Command::Generate => commands::cmd_generate(&build_config(&cli)?),
        Command::Extract => commands::cmd_extract(&build_config(&cli)?),
        Command::Evaluate => commands::cmd_evaluate(&build_config(&cli)?),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("ENGAGE_FACETS_LOG", "warn"),
    )
    .init();

    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}
