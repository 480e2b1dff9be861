//! `windowlens` command-line tool.

mod args;
mod cmd;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use args::{BenchmarkArg, LexiconArgs, ModelArg};

/// Exit status for usage errors, matching clap's own.
const USAGE: u8 = 2;

/// Marks an error caused by bad flags rather than bad data.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "windowlens", version, about = "Context-window experiments for word embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a CBOW or SGNS model and write it in word2vec text format.
    Train(TrainArgs),
    /// Spearman correlation of each model on each benchmark.
    Eval(EvalArgs),
    /// Same-POS enrichment of related pairs, one row per benchmark.
    Enrich(EnrichArgs),
    /// Window sweep of neighbor POS histograms.
    Sweep(SweepArgs),
    /// Build NOUN/ADJ/VERB pivot lists from WordNet and a tag lexicon.
    Pivots(PivotsArgs),
    /// Dump nearest neighbors of pivot words.
    Neighbors(NeighborsArgs),
    /// Lowercase a raw text file and strip it to alphanumeric tokens.
    ImportCorpus(ImportCorpusArgs),
    /// Convert a benchmark file into the canonical three-column TSV.
    ImportBenchmark(ImportBenchmarkArgs),
    /// Generate a synthetic corpus and its gold tag lexicon.
    GenCorpus(GenCorpusArgs),
    /// Derive a most-frequent-tag lexicon from tagged tokens.
    DeriveLexicon(DeriveLexiconArgs),
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value = "sgns")]
    pub algo: windowlens::Algorithm,
    #[arg(long, default_value_t = 300)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, default_value_t = 5)]
    pub min_count: u64,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    #[arg(long, default_value_t = 0.05)]
    pub learning_rate: f64,
    /// Frequent-word subsampling threshold (0 disables).
    #[arg(long, default_value_t = 1e-4)]
    pub subsample: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// More than one thread trades determinism for speed.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Keep context windows inside each line.
    #[arg(long)]
    pub respect_lines: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EvalArgs {
    /// `[algo:]window=path`, repeatable.
    #[arg(long = "model", required = true)]
    pub models: Vec<ModelArg>,
    /// `[name=]path` to a canonical benchmark TSV, repeatable.
    #[arg(long = "benchmark", required = true)]
    pub benchmarks: Vec<BenchmarkArg>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EnrichArgs {
    /// `[name=]path` to a canonical benchmark TSV, repeatable.
    #[arg(long = "benchmark")]
    pub benchmarks: Vec<BenchmarkArg>,
    #[command(flatten)]
    pub lexicon: LexiconArgs,
    /// Precomputed counts (`name n_related related_same n_unrelated unrelated_same`)
    /// used instead of benchmarks and lexicons.
    #[arg(long, conflicts_with = "benchmarks")]
    pub counts: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SweepArgs {
    /// key=value sweep description; flags given alongside override it.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Comma-separated subset of cbow,sgns.
    #[arg(long, value_delimiter = ',')]
    pub algorithms: Option<Vec<windowlens::Algorithm>>,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    pub windows: Option<Vec<usize>>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub min_count: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Pretrained `[algo:]window=path` models used instead of training.
    #[arg(long = "model")]
    pub models: Vec<ModelArg>,
    #[arg(long = "benchmark")]
    pub benchmarks: Vec<BenchmarkArg>,
    #[command(flatten)]
    pub lexicon: LexiconArgs,
    /// Pivot lists as written by `pivots`; built from the lexicon if absent.
    #[arg(long)]
    pub pivots: Option<PathBuf>,
    #[arg(long)]
    pub k_search: Option<usize>,
    #[arg(long)]
    pub k_keep: Option<usize>,
    /// Also write every trained model under <out-dir>/models.
    #[arg(long)]
    pub save_models: bool,
    /// Concurrent training jobs.
    #[arg(long, env = "WINDOWLENS_JOBS")]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args)]
pub struct PivotsArgs {
    #[arg(long)]
    pub wordnet_dir: PathBuf,
    #[arg(long)]
    pub mft_lexicon: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct NeighborsArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Pivot TSV as written by `pivots`.
    #[arg(long, required_unless_present = "words")]
    pub pivots: Option<PathBuf>,
    /// Individual query words, repeatable.
    #[arg(long = "word")]
    pub words: Vec<String>,
    /// Neighbors kept per pivot.
    #[arg(long, default_value_t = windowlens::analysis::DEFAULT_K_KEEP)]
    pub k: usize,
    /// Neighbors retrieved before lexicon filtering.
    #[arg(long, default_value_t = windowlens::analysis::DEFAULT_K_SEARCH)]
    pub k_search: usize,
    #[command(flatten)]
    pub lexicon: LexiconArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ImportCorpusArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum Layout {
    Csv,
    Tsv,
}

#[derive(Args)]
pub struct ImportBenchmarkArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub layout: Layout,
    /// 1-based score column for the tsv layout.
    #[arg(long, default_value_t = 3)]
    pub score_column: usize,
    #[arg(long)]
    pub skip_header: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct GenCorpusArgs {
    #[arg(long)]
    pub grammar: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub sentences: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write the gold word→tag lexicon.
    #[arg(long)]
    pub lexicon_out: PathBuf,
}

#[derive(Args)]
pub struct DeriveLexiconArgs {
    /// `word<TAB>tag` lines; UD and Penn tags are coarsened.
    #[arg(long)]
    pub tagged: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => cmd::train::run(a),
        Command::Eval(a) => cmd::eval::run(a),
        Command::Enrich(a) => cmd::enrich::run(a),
        Command::Sweep(a) => cmd::sweep::run(a),
        Command::Pivots(a) => cmd::tools::pivots(a),
        Command::Neighbors(a) => cmd::tools::neighbors(a),
        Command::ImportCorpus(a) => cmd::tools::import_corpus(a),
        Command::ImportBenchmark(a) => cmd::tools::import_benchmark(a),
        Command::GenCorpus(a) => cmd::tools::gen_corpus(a),
        Command::DeriveLexicon(a) => cmd::tools::derive_lexicon(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
