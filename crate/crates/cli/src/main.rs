mod commands;
mod error;
mod io;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;
use crate::settings::Settings;

#[derive(Parser, Debug)]
#[command(name = "morphseg", version, about = "Canonical morpheme segmentation toolkit")]
struct Cli {
    /// Config file of `flag-name = value` pairs; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "MORPHSEG_THREADS")]
    threads: Option<usize>,

    /// More log output; repeat for debug level.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stratified train/dev/test split of a word-level file.
    Split(SplitArgs),
    /// Train a model and write it as JSON.
    Train(TrainArgs),
    /// Segment words or sentences with a trained model.
    Segment(SegmentArgs),
    /// Score predictions against gold data.
    Evaluate(EvaluateArgs),
    /// Compare several systems per category and word length.
    Analyze(AnalyzeArgs),
    /// Extract compounds from (title, wikitext) pages.
    Extract(ExtractArgs),
    /// Inherited words minus derived and compound words.
    Roots(RootsArgs),
    /// Category histogram of a data file.
    Stats(StatsArgs),
    /// Over- or undersample categories to target counts.
    Resample(ResampleArgs),
    /// Add entries of selected categories from other languages.
    Augment(AugmentArgs),
}

#[derive(Args, Debug)]
pub struct SplitArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// File name prefix (default: input name without `.tsv`).
    #[arg(long)]
    pub prefix: Option<String>,
    /// Fraction such as `0.8`, `80%` or `4/5`.
    #[arg(long)]
    pub train: Option<String>,
    #[arg(long)]
    pub dev: Option<String>,
    #[arg(long)]
    pub test: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sentence-level file whose tokens must not appear in any split.
    #[arg(long)]
    pub exclude: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Bpe,
    Wordpiece,
    Ulm,
    Morfessor,
    Hmm,
    Labeler,
    Context,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// BPE merge operations.
    #[arg(long)]
    pub merges: Option<usize>,
    /// WordPiece or ULM vocabulary size.
    #[arg(long)]
    pub vocab_size: Option<usize>,
    /// Training epochs (labeler, Morfessor).
    #[arg(long)]
    pub epochs: Option<usize>,
    /// EM iterations (ULM, HMM).
    #[arg(long)]
    pub em_iters: Option<usize>,
    /// Convergence tolerance (HMM log-likelihood, Morfessor cost).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_affix_len: Option<usize>,
    #[arg(long)]
    pub max_candidates: Option<usize>,
    /// Train the HMM from words alone.
    #[arg(long)]
    pub unsupervised: bool,
    /// Allow consecutive roots in the HMM.
    #[arg(long)]
    pub compounds: bool,
}

#[derive(Args, Debug)]
pub struct SegmentArgs {
    /// Word-level model file.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Context model; switches to sentence-level input.
    #[arg(long)]
    pub context: Option<PathBuf>,
    /// Sentence-level input segmented token by token with the model alone.
    #[arg(long, conflicts_with = "context")]
    pub no_context: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Default, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Tsv,
    Json,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub by_category: bool,
    /// Length buckets such as `1-5,5-10,10-`.
    #[arg(long)]
    pub by_length: Option<String>,
    /// `multiset` or `positional` morpheme matching.
    #[arg(long)]
    pub policy: Option<String>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub gold: PathBuf,
    /// `NAME=predictions.tsv`, repeated once per system.
    #[arg(long = "system", required = true)]
    pub systems: Vec<String>,
    #[arg(long)]
    pub by_length: Option<String>,
    #[arg(long)]
    pub policy: Option<String>,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    /// `title<TAB>wikitext` lines.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub lang: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write non-concatenative compounds.
    #[arg(long)]
    pub review: Option<PathBuf>,
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RootsArgs {
    /// Word list (first column used).
    #[arg(long)]
    pub inherited: PathBuf,
    /// Derived or compound word lists, repeatable.
    #[arg(long = "remove", required = true)]
    pub remove: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Args, Debug)]
pub struct ResampleArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// `CODE=COUNT`, e.g. `001=500`; repeatable.
    #[arg(long = "target", required = true)]
    pub targets: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct AugmentArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// `LANG=FILE`, repeatable.
    #[arg(long = "donor", required = true)]
    pub donors: Vec<String>,
    /// Comma-separated category codes to borrow.
    #[arg(long)]
    pub categories: String,
    #[arg(long)]
    pub out: PathBuf,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let settings = Settings::load(cli.config.as_deref())?;
    if let Some(n) = settings.pick(cli.threads, "threads")? {
        if n == 0 {
            return Err(error::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.into()))?;
    }
    match cli.command {
        Command::Split(args) => commands::split(&args, &settings),
        Command::Train(args) => commands::train(&args, &settings),
        Command::Segment(args) => commands::segment(&args),
        Command::Evaluate(args) => commands::evaluate(&args, &settings),
        Command::Analyze(args) => commands::analyze(&args, &settings),
        Command::Extract(args) => commands::extract(&args),
        Command::Roots(args) => commands::roots(&args),
        Command::Stats(args) => commands::stats(&args, &settings),
        Command::Resample(args) => commands::resample(&args, &settings),
        Command::Augment(args) => commands::augment(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
