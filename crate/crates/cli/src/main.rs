//! `cliquegan`: overlapping community detection from the command line.

mod commands;
mod manifest;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CliError;

#[derive(Parser)]
#[command(name = "cliquegan", version, about = "Overlapping community detection with adversarially trained clique embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect overlapping communities in an edge list.
    Detect(DetectArgs),
    /// Compare a detected cover against ground truth (F1 and NMI).
    Eval(EvalArgs),
    /// Generate a planted overlapping-community graph.
    Synth(SynthArgs),
    /// Clique occurrence inside communities versus the whole graph.
    Stats(StatsArgs),
    /// Hide cliques, train on the rest, and report clique-prediction AUC.
    Cliquepred(CliquePredArgs),
}

/// Training settings shared by `detect` and `cliquepred`. Each flag overrides
/// the same key of `--config`, which overrides the built-in default.
#[derive(Args, Clone, Debug, Default)]
pub struct TrainArgs {
    /// Clique size m used as the motif.
    #[arg(long)]
    pub clique_size: Option<usize>,
    /// Number of communities, or `auto` to choose among --candidates.
    #[arg(long)]
    pub num_communities: Option<String>,
    /// Comma-separated candidate counts for `--num-communities auto`.
    #[arg(long)]
    pub candidates: Option<String>,
    /// Initialization: agm-pretrain or locally-minimal.
    #[arg(long)]
    pub init: Option<String>,
    /// Maximum adversarial iterations (0 keeps the initialization).
    #[arg(long)]
    pub iters: Option<usize>,
    /// Learning rate of the adversarial updates.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Pretraining epochs.
    #[arg(long)]
    pub pretrain_epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for sampling; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// File of key=value training settings.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
}

#[derive(Args)]
pub struct DetectArgs {
    #[arg(long)]
    pub graph: std::path::PathBuf,
    /// Output community file; embeddings, metadata and the run manifest are
    /// written next to it.
    #[arg(long)]
    pub communities_out: std::path::PathBuf,
    #[command(flatten)]
    pub train: TrainArgs,
    /// Manifest path; defaults to `<stem>.manifest.json` beside the communities.
    #[arg(long)]
    pub manifest: Option<std::path::PathBuf>,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub truth: std::path::PathBuf,
    #[arg(long)]
    pub detected: std::path::PathBuf,
    /// Optional graph; when given, every community member must be a vertex.
    #[arg(long)]
    pub graph: Option<std::path::PathBuf>,
    /// Append a CSV row with the metrics to this file.
    #[arg(long)]
    pub csv: Option<std::path::PathBuf>,
    /// Run label for the CSV row.
    #[arg(long, default_value = "run")]
    pub label: String,
    #[arg(long)]
    pub manifest: Option<std::path::PathBuf>,
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 1000)]
    pub vertices: usize,
    #[arg(long, default_value_t = 200)]
    pub communities: usize,
    /// Mean memberships per vertex.
    #[arg(long, default_value_t = 3.0)]
    pub memberships: f64,
    /// Draw memberships from a truncated power law instead of a shifted Poisson.
    #[arg(long)]
    pub heavy_tail: bool,
    #[arg(long, default_value_t = 0.95)]
    pub p_in: f64,
    #[arg(long, default_value_t = 0.002)]
    pub p_out: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub graph_out: std::path::PathBuf,
    #[arg(long)]
    pub truth_out: std::path::PathBuf,
    #[arg(long)]
    pub manifest: Option<std::path::PathBuf>,
}

#[derive(Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub graph: std::path::PathBuf,
    #[arg(long)]
    pub truth: std::path::PathBuf,
    /// Comma-separated clique sizes.
    #[arg(long, default_value = "2,3")]
    pub sizes: String,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub manifest: Option<std::path::PathBuf>,
}

#[derive(Args)]
pub struct CliquePredArgs {
    #[arg(long)]
    pub graph: std::path::PathBuf,
    /// Size of the cliques to hide and predict; also the training motif size
    /// unless --clique-size is given.
    #[arg(long, default_value_t = 3)]
    pub predict_size: usize,
    /// Fraction of edges covered by hidden cliques.
    #[arg(long, default_value_t = 0.1)]
    pub hide_fraction: f64,
    /// Embedding fed to the scorer: discriminator or generator.
    #[arg(long, default_value = "discriminator")]
    pub embedding: String,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long)]
    pub manifest: Option<std::path::PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().collect();
    let run = std::panic::catch_unwind(|| match &cli.command {
        Command::Detect(a) => commands::detect(a, &argv),
        Command::Eval(a) => commands::eval(a, &argv),
        Command::Synth(a) => commands::synth(a, &argv),
        Command::Stats(a) => commands::stats(a, &argv),
        Command::Cliquepred(a) => commands::cliquepred(a, &argv),
    });
    let result = run.unwrap_or_else(|_| Err(CliError::Internal("internal error (panic)".into())));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Input(_) => 2,
            CliError::Guard(_) => 3,
        }
    }
}
