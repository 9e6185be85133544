//! `treeprobe`: staged pipeline from raw ALSC corpora to tree metrics.
//!
//! Stages communicate through files: canonical sample JSONL, impact matrix
//! files, CoNLL-U trees, feature JSONL and metric reports. Every output
//! directory carries a `manifest.json` with digests of what went in and out.

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use treeprobe::decode::Decoder;
use treeprobe::metrics::Pooling;
use treeprobe::perturb::Aggregation;
use treeprobe::perturb::DEFAULT_LAYER;
use treeprobe::{Direction, TreeSource};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "treeprobe",
    version,
    about = "Perturbed Masking tree induction toolkit"
)]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Proceed even if an input no longer matches its recorded digest.
    #[arg(long, global = true)]
    force: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse raw corpora into canonical sample JSONL.
    Ingest(IngestArgs),
    /// Compute or import impact matrices.
    Matrices(MatricesArgs),
    /// Produce trees from matrices, baselines or imported parses.
    Decode(DecodeArgs),
    /// Export adjacency, proximity and reshaped-tree features.
    Features(FeaturesArgs),
    /// Score tree sources and compare them.
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Semeval,
    Twitter,
    Jsonl,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[arg(long, value_enum)]
    pub format: InputFormat,
    /// Dataset name used in output file names and sample ids.
    #[arg(long)]
    pub name: String,
    #[arg(long)]
    #[serde(skip)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub test: Option<PathBuf>,
    /// Snap aspect offsets that cut through a token instead of failing.
    #[arg(long)]
    pub lenient_align: bool,
    #[arg(long, default_value = "en")]
    pub language: String,
    /// Hold out this fraction of train as a dev split.
    #[arg(long)]
    pub dev_fraction: Option<f64>,
    #[arg(long, env = "TREEPROBE_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct MatricesArgs {
    #[arg(long)]
    #[serde(skip)]
    pub samples: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Encoder layer whose representations are compared.
    #[arg(long, default_value_t = DEFAULT_LAYER)]
    pub layer: usize,
    /// JSON encoder configuration; defaults to a toy encoder over the
    /// sample vocabulary.
    #[arg(long)]
    #[serde(skip)]
    pub encoder_config: Option<PathBuf>,
    #[arg(long, env = "TREEPROBE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Store (M + M^T) / 2 instead of M.
    #[arg(long)]
    pub symmetrize: bool,
    /// Subword-level matrix file from an external extractor.
    #[arg(long, requires = "alignments")]
    #[serde(skip)]
    pub subwords: Option<PathBuf>,
    /// Word-to-subword alignment JSONL matching `--subwords`.
    #[arg(long, requires = "subwords")]
    #[serde(skip)]
    pub alignments: Option<PathBuf>,
    #[arg(long, default_value = "mean")]
    pub aggregation: Aggregation,
}

#[derive(Debug, Args, Serialize)]
pub struct DecodeArgs {
    #[arg(long)]
    #[serde(skip)]
    pub samples: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Tree sources to produce; repeatable.
    #[arg(long = "source", required = true)]
    pub sources: Vec<TreeSource>,
    /// Matrix file for `induced`.
    #[arg(long)]
    #[serde(skip)]
    pub matrices: Option<PathBuf>,
    /// Matrix file for `ft_induced`.
    #[arg(long)]
    #[serde(skip)]
    pub ft_matrices: Option<PathBuf>,
    /// Parser output for `dep_parser`.
    #[arg(long)]
    #[serde(skip)]
    pub conllu: Option<PathBuf>,
    #[arg(long, default_value = "cle")]
    pub decoder: Decoder,
    #[arg(long, default_value = "impact_on_dependent")]
    pub direction: Direction,
    /// Fixed root position for Chu-Liu/Edmonds.
    #[arg(long)]
    pub root: Option<usize>,
    /// Prefer arcs with low impact.
    #[arg(long)]
    pub minimize: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct FeaturesArgs {
    #[arg(long)]
    #[serde(skip)]
    pub samples: PathBuf,
    /// CoNLL-U tree files, one per source.
    #[arg(long = "trees", required = true)]
    #[serde(skip)]
    pub trees: Vec<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[arg(long)]
    #[serde(skip)]
    pub samples: PathBuf,
    #[arg(long = "trees", required = true)]
    #[serde(skip)]
    pub trees: Vec<PathBuf>,
    /// Aspect-opinion pair JSONL for pAsD.
    #[arg(long)]
    #[serde(skip)]
    pub pairs: Option<PathBuf>,
    /// Sentiment lexicon JSON `{"positive":[..],"negative":[..]}`.
    #[arg(long)]
    #[serde(skip)]
    pub lexicon: Option<PathBuf>,
    #[arg(long, default_value = "pooled")]
    pub pooling: Pooling,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::config("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(CliError::internal)?;
    }
    match &cli.command {
        Command::Ingest(args) => commands::ingest(args, cli.force),
        Command::Matrices(args) => commands::matrices(args, cli.force),
        Command::Decode(args) => commands::decode(args, cli.force),
        Command::Features(args) => commands::features(args, cli.force),
        Command::Analyze(args) => commands::analyze(args, cli.force),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
