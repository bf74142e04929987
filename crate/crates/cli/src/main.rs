//! spotbot: detect machine-generated text from cluster geometry and
//! entropy-complexity features of semantic paths.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CliError;

#[derive(Parser)]
#[command(name = "spotbot", version, about = "Spot the bot: semantic-path analysis of texts")]
struct Cli {
    /// Worker threads for parallel stages (0 = rayon default)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize raw texts and build the corpus cache
    Ingest(IngestArgs),
    /// Produce word embeddings (SVD of the document-term matrix, or load a vector file)
    Embed(EmbedArgs),
    /// Build semantic paths of concatenated n-gram embeddings
    Path(PathArgs),
    /// Cluster each text's n-gram embeddings
    Cluster(ClusterArgs),
    /// Per-text cluster statistics (RMSSTD, RS, noise ratio, inter-cluster distances)
    Stats(StatsArgs),
    /// Wilcoxon test between two stats files
    Wilcoxon(WilcoxonArgs),
    /// Entropy-complexity features over an (m, n) parameter grid
    Ecplane(EcplaneArgs),
    /// Theoretical boundary curves of the entropy-complexity plane
    Boundaries(BoundariesArgs),
    /// Assemble a feature table for classification
    Features(FeaturesArgs),
    /// Train the linear max-margin classifier with cross-validation
    Train(TrainArgs),
    /// Evaluate a trained model on a feature table
    Eval(EvalArgs),
    /// Run the full pipeline from a config file
    Run(RunArgs),
    /// Generate bot texts with a seeded order-k Markov sampler
    GenMarkov(GenMarkovArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Directory of UTF-8 .txt files (repeatable)
    #[arg(long)]
    input: Vec<PathBuf>,
    /// Label per --input directory (one value applies to all)
    #[arg(long)]
    label: Vec<String>,
    /// Manifest JSON: [{"id": ..., "path": ..., "label": ...}]
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Treat input files as pre-tokenized (one token per whitespace field)
    #[arg(long)]
    pretokenized: bool,
    /// Vocabulary min-count cutoff
    #[arg(long, default_value_t = 1)]
    min_count: u64,
    /// Keep original case
    #[arg(long)]
    no_lowercase: bool,
    /// Keep punctuation characters inside tokens
    #[arg(long)]
    keep_punctuation: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// svd | load
    #[arg(long, default_value = "svd")]
    method: String,
    #[arg(long, default_value_t = 8)]
    dim: usize,
    /// log | raw count weighting (svd)
    #[arg(long, default_value = "log")]
    weighting: String,
    /// Vector file for --method load
    #[arg(long)]
    vectors: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PathArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Embedding vector file (plain-text format)
    #[arg(long)]
    vectors: PathBuf,
    /// n-gram length
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Output directory (paths.bin + paths.json)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClusterArgs {
    /// Directory with paths.bin + paths.json
    #[arg(long)]
    paths: PathBuf,
    /// kmeans | cmeans | wishart | wishart-fuzzy
    #[arg(long)]
    algo: String,
    #[arg(long, default_value_t = 8)]
    k: usize,
    #[arg(long, default_value_t = 8)]
    k_neighbors: usize,
    /// Wishart significance threshold (log-density units)
    #[arg(long, default_value_t = 0.0)]
    h: f64,
    #[arg(long, default_value_t = 2.0)]
    fuzzifier: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Cap on points per text (prefix subsample)
    #[arg(long, default_value_t = 100_000)]
    sample: usize,
    /// Corpus cache (required for wishart-fuzzy membership weights)
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Embedding vector file (required for wishart-fuzzy)
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Fuzzification core width (default: 0.1 x per-dimension std)
    #[arg(long)]
    delta_c: Option<f64>,
    /// Left support extension
    #[arg(long)]
    l: Option<f64>,
    /// Right support extension
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, default_value_t = 11)]
    alpha_levels: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    paths: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct WilcoxonArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value = "rmsstd")]
    column: String,
    /// exact | normal
    #[arg(long, default_value = "normal")]
    mode: String,
    /// Paired signed-rank variant instead of the rank-sum test
    #[arg(long)]
    signed_rank: bool,
}

#[derive(Args)]
struct EcplaneArgs {
    #[arg(long)]
    paths: PathBuf,
    /// Grid such as "1..3" or "1,2"
    #[arg(long, default_value = "1..2")]
    m: String,
    /// Grid such as "2..14" or "3,4,5,6"
    #[arg(long, default_value = "3..6")]
    n: String,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Skip cells whose alphabet (n!)^m exceeds this budget
    #[arg(long, default_value_t = 1e7)]
    budget: f64,
    /// Chaotic margin as a fraction of the maximum upper-curve complexity
    #[arg(long, default_value_t = 0.05)]
    delta_frac: f64,
    #[arg(long, default_value_t = 1000)]
    boundary_samples: usize,
    #[arg(long)]
    out: PathBuf,
    /// Also write the per-cell aggregate sweep table
    #[arg(long)]
    sweep_out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundariesArgs {
    /// Ordinal pattern length
    #[arg(long)]
    n: usize,
    /// Number of pattern components
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Rows in the plot-ready CSV (shared h grid)
    #[arg(long, default_value_t = 1000)]
    grid: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FeaturesArgs {
    /// ec | cluster
    #[arg(long)]
    kind: String,
    /// ec.csv from `spotbot ecplane` (kind = ec)
    #[arg(long)]
    ec: Option<PathBuf>,
    /// Pattern components of the chosen cell (kind = ec)
    #[arg(long)]
    m: Option<usize>,
    /// Pattern length of the chosen cell (kind = ec)
    #[arg(long)]
    n: Option<usize>,
    /// stats.csv from `spotbot stats` (kind = cluster)
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Corpus cache supplying document labels
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    features: PathBuf,
    /// Comma-separated lambda grid
    #[arg(long, default_value = "1e-4,1e-3,1e-2")]
    lambda_grid: String,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    /// Optional JSON report
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the config's output directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Override the config's seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct GenMarkovArgs {
    /// Corpus cache to train on (human-labeled documents)
    #[arg(long)]
    corpus: PathBuf,
    /// word | char
    #[arg(long, default_value = "word")]
    level: String,
    #[arg(long, default_value_t = 2)]
    order: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// One generated text per human document, token count matched
    #[arg(long, default_value_t = true)]
    match_lengths: bool,
    /// Generate exactly this many texts instead
    #[arg(long)]
    num_texts: Option<usize>,
    /// Token length when --num-texts is given
    #[arg(long, default_value_t = 500)]
    length: usize,
    /// Output directory for .txt files
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };

    if cli.jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global();
    }

    let result = match cli.command {
        Command::Ingest(a) => commands::data::ingest(a),
        Command::Embed(a) => commands::data::embed(a),
        Command::Path(a) => commands::data::path(a),
        Command::Cluster(a) => commands::cluster::cluster(a),
        Command::Stats(a) => commands::cluster::stats(a),
        Command::Wilcoxon(a) => commands::cluster::wilcoxon(a),
        Command::Ecplane(a) => commands::ec::ecplane(a),
        Command::Boundaries(a) => commands::ec::boundaries(a),
        Command::Features(a) => commands::model::features(a),
        Command::Train(a) => commands::model::train(a),
        Command::Eval(a) => commands::model::eval(a),
        Command::Run(a) => commands::run::run(a),
        Command::GenMarkov(a) => commands::data::gen_markov(a),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
