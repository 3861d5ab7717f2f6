//! `corpus-audit`: index, merge, search, audit and probe text corpora.
//!
//! Exit codes:
//!
//! | code | meaning                                        |
//! |------|------------------------------------------------|
//! | 0    | success                                        |
//! | 1    | any other failure                              |
//! | 2    | invalid arguments or configuration             |
//! | 3    | I/O failure                                    |
//! | 4    | unknown query type                             |
//! | 5    | corrupt or unreadable index or input data      |
//! | 6    | merge refused (analyzer or doc-count mismatch) |
//! | 7    | query timed out                                |
//! | 8    | nothing to do (empty index or keyword file)    |

mod commands;
mod size;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use corpus_audit::Error;

use crate::size::{parse_range, parse_size};

pub const HOME_ENV: &str = "CORPUS_AUDIT_HOME";

#[derive(Parser)]
#[command(name = "corpus-audit", version, about = "Index, search and audit large text corpora")]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or append to an index from parquet files.
    Index(IndexArgs),
    /// Merge several indexes into a new one.
    Merge(MergeArgs),
    /// Run one query.
    Search(SearchArgs),
    /// Run a keyword list through every configured query type.
    Audit(AuditArgs),
    /// Verbatim self-retrieval probe.
    Probe(ProbeArgs),
    /// Show manifest and shard statistics.
    Stats(StatsArgs),
    /// Merge every shard's segments into one.
    Compact(StatsArgs),
    /// Bloom-filter membership baseline.
    #[command(subcommand)]
    Bloom(BloomCommand),
    /// Write a seeded synthetic parquet corpus.
    Generate(GenerateArgs),
}

#[derive(Args)]
pub struct JsonFlag {
    /// Machine-readable JSON on standard output.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Args)]
pub struct IndexArgs {
    /// Parquet files or directories of them.
    #[arg(long, short, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// Index directory; defaults to $CORPUS_AUDIT_HOME/index.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Shard count when creating a new index (default 16).
    #[arg(long)]
    pub shards: Option<usize>,
    /// JSON file with bulk parameters; flags override it.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub thread_count: Option<usize>,
    #[arg(long)]
    pub chunk_size: Option<u64>,
    #[arg(long, value_parser = parse_size)]
    pub max_chunk_bytes: Option<u64>,
    #[arg(long)]
    pub queue_size: Option<usize>,
    /// Only the files in this half-open range, e.g. `0:125`.
    #[arg(long, value_parser = parse_range)]
    pub file_range: Option<std::ops::Range<usize>>,
    /// Worker number for id assignment (`worker << 40`).
    #[arg(long, default_value_t = 0)]
    pub worker: u32,
    #[arg(long, default_value = "en")]
    pub language: String,
    /// In-memory buffer budget before spilling, e.g. `256MB`.
    #[arg(long, value_parser = parse_size)]
    pub memory_budget: Option<u64>,
    #[command(flatten)]
    pub out: JsonFlag,
}

#[derive(Args)]
pub struct MergeArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub sources: Vec<PathBuf>,
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub shards: usize,
    #[command(flatten)]
    pub out: JsonFlag,
}

#[derive(Args)]
pub struct SearchArgs {
    /// Index directory; defaults to $CORPUS_AUDIT_HOME/index.
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// match, match_phrase, term_exact, fuzzy or bool_must.
    #[arg(long = "type", short = 't')]
    pub query_type: String,
    #[arg(long, short)]
    pub query: String,
    #[arg(long)]
    pub slop: Option<u32>,
    /// `auto` or an edit distance.
    #[arg(long)]
    pub fuzziness: Option<String>,
    #[arg(long)]
    pub operator: Option<String>,
    /// Fuzzy expansion cap; 0 disables it.
    #[arg(long)]
    pub max_expansions: Option<usize>,
    #[arg(long)]
    pub minimum_should_match: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    #[arg(long)]
    pub timeout_ms: Option<u64>,
    #[command(flatten)]
    pub out: JsonFlag,
}

#[derive(Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[arg(long)]
    pub keywords: PathBuf,
    /// Query configuration JSON; all types with defaults when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// JSONL report path.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// CSV export of the statistics rows.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub top_k: usize,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[command(flatten)]
    pub out: JsonFlag,
}

#[derive(Args)]
pub struct ProbeArgs {
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "1,10,100,300")]
    pub lengths: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub slop: u32,
    /// JSON file with every record and miss.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub out: JsonFlag,
}

#[derive(Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[command(flatten)]
    pub out: JsonFlag,
}

#[derive(Subcommand)]
pub enum BloomCommand {
    /// Build a filter from an index's main-field dictionary.
    Build(BloomBuildArgs),
    /// Test one term against a filter.
    Probe(BloomProbeArgs),
}

#[derive(Args)]
pub struct BloomBuildArgs {
    #[arg(long)]
    pub capacity: Option<u64>,
    #[arg(long, default_value_t = 0.01)]
    pub fp_rate: f64,
    #[arg(long)]
    pub from_index: PathBuf,
    pub out_file: PathBuf,
    #[command(flatten)]
    pub out: JsonFlag,
}

#[derive(Args)]
pub struct BloomProbeArgs {
    pub filter: PathBuf,
    pub term: String,
    #[command(flatten)]
    pub out: JsonFlag,
}

#[derive(Args)]
pub struct GenerateArgs {
    #[arg(long, short)]
    pub output: PathBuf,
    /// Total text size, e.g. `100MB`.
    #[arg(long, value_parser = parse_size)]
    pub size: u64,
    #[arg(long, default_value_t = 8)]
    pub files: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub stopword_rate: Option<f64>,
    #[command(flatten)]
    pub out: JsonFlag,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) | Error::InvalidShardCount | Error::PathPopulated(_) | Error::ZeroAvgDocSize => 2,
        Error::Io { .. } => 3,
        Error::UnknownQueryType(_) => 4,
        Error::Corrupt { .. } | Error::PartialIngest { .. } | Error::MissingTextColumn(_) | Error::Json(_) | Error::Csv(_) => 5,
        Error::AnalyzerMismatch(_) | Error::DocCountMismatch { .. } => 6,
        Error::QueryTimeout { .. } => 7,
        Error::EmptyIndex | Error::EmptyKeywords(_) => 8,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
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

    let result = match cli.command {
        Command::Index(a) => commands::index(a),
        Command::Merge(a) => commands::merge(a),
        Command::Search(a) => commands::search(a),
        Command::Audit(a) => commands::audit(a),
        Command::Probe(a) => commands::probe(a),
        Command::Stats(a) => commands::stats(a),
        Command::Compact(a) => commands::compact(a),
        Command::Bloom(BloomCommand::Build(a)) => commands::bloom_build(a),
        Command::Bloom(BloomCommand::Probe(a)) => commands::bloom_probe(a),
        Command::Generate(a) => commands::generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
