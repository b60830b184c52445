//! `thicket`: experiments and exact verification for Littlestone-dimension
//! learners.
//!
//! Exit codes: 0 success, 1 property violation, 2 usage error, 3 I/O or parse
//! error.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use report::UsageError;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "thicket",
    version,
    about = "Learning with random counterexamples, staged learning and compression schemes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Littlestone dimension of a class file.
    Ldim(LdimArgs),
    /// Monte Carlo runs of the max-min learner against a random teacher.
    Learn(LearnArgs),
    /// Exact expected number of queries of the max-min learner.
    LearnExact(LearnExactArgs),
    /// Staged learner on a countable family with a prior over targets.
    Staged(StagedArgs),
    /// Certify the extended compression scheme on every realizable sample.
    Compress(CompressArgs),
    /// Run the exact property checks on a class file or a random corpus.
    Verify(VerifyArgs),
    /// Emit a random class file.
    Gen(GenArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Output options shared by every command.
#[derive(Clone, Debug, Args, Serialize)]
pub struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Report format (default depends on the command).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Add wall-clock time to the report. Makes output nondeterministic.
    #[arg(long)]
    #[serde(skip)]
    pub timing: bool,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct LdimArgs {
    #[arg(long)]
    pub class: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct LearnArgs {
    #[arg(long)]
    pub class: PathBuf,
    /// Label of the target concept.
    #[arg(long)]
    pub target: String,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct LearnExactArgs {
    #[arg(long)]
    pub class: PathBuf,
    /// Label of the target concept; every concept when omitted.
    #[arg(long)]
    pub target: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct StagedArgs {
    /// `intervals` or `file:<path>` (a class file with a `tau` prior).
    #[arg(long)]
    pub family: String,
    /// Ratio `p` of the geometric prior `(1-p) p^(n-1)` for `intervals`.
    #[arg(long, default_value = "1/2")]
    pub prior_geometric: String,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = thicket_core::staged::DEFAULT_STAGE_CAP)]
    pub stage_cap: u32,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct CompressArgs {
    #[arg(long)]
    pub class: PathBuf,
    /// Largest sample size to certify (default: the whole domain).
    #[arg(long)]
    pub max_sample_size: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckArg {
    DropPair,
    EdgePair,
    QueryRank,
    NoDeficientCycle,
    LearnerBound,
    Compression,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConventionArg {
    /// Weight symmetric-difference points by the drops of the target.
    Target,
    /// Weight by the drops of the query (for mutation testing).
    Query,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(
        long,
        conflicts_with = "random_classes",
        required_unless_present = "random_classes"
    )]
    pub class: Option<PathBuf>,
    /// Number of seeded random classes to check.
    #[arg(long)]
    pub random_classes: Option<u64>,
    #[arg(long, default_value_t = 5)]
    pub max_domain: usize,
    #[arg(long, default_value_t = 8)]
    pub max_concepts: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Comma-separated subset of checks (default: all).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub checks: Vec<CheckArg>,
    #[arg(long, default_value_t = 5)]
    pub max_cycle_len: usize,
    #[arg(long)]
    pub max_sample_size: Option<usize>,
    #[arg(long, value_enum, default_value_t = ConventionArg::Target)]
    pub edge_convention: ConventionArg,
    /// Also write each offending class to `<dir>/violation-<n>.json`.
    #[arg(long)]
    pub witness_dir: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Number of domain points.
    #[arg(long)]
    pub domain: usize,
    /// Number of distinct concepts.
    #[arg(long)]
    pub concepts: usize,
    /// Also emit a random `tau` prior.
    #[arg(long)]
    pub tau: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Ldim(a) => commands::ldim(a),
        Command::Learn(a) => commands::learn(a),
        Command::LearnExact(a) => commands::learn_exact(a),
        Command::Staged(a) => commands::staged(a),
        Command::Compress(a) => commands::compress(a),
        Command::Verify(a) => commands::verify(a),
        Command::Gen(a) => commands::gen(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
