//! `potrel`: failure-intensity bounds, test planning, session monitoring,
//! curve data and content relevance from the command line.
//!
//! Exit codes: 0 success, 1 usage, 2 domain, 3 input/output.

mod commands;
mod error;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "potrel", version, about = "Potential-reliability quantification toolkit")]
struct Cli {
    /// Machine-readable JSON output
    #[arg(long, global = true)]
    json: bool,
    /// Suppress informational output
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Failure-intensity bounds at a given coverage
    Bounds(BoundsArgs),
    /// Tests needed for four-, six- and enough-sigma targets
    Plan(PlanArgs),
    /// Replay a JSON Lines session log and report status
    Monitor(MonitorArgs),
    /// Emit c -> lambda, reliability, relevance curve data as CSV
    Curve(CurveArgs),
    /// Build a term-frequency index from text files
    Index(IndexArgs),
    /// Rank indexed documents against a query
    Query(QueryArgs),
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// Total sites n (scientific notation accepted)
    #[arg(long, value_parser = format::parse_count)]
    n: u64,
    /// Test coverage c in [0, 1]
    #[arg(long, value_parser = format::parse_unit_closed)]
    coverage: f64,
    /// Semantic mean p_s in (0, 1)
    #[arg(long, value_parser = format::parse_unit_open)]
    semantic_mean: f64,
    /// Constant standing in for the O(ln n) term of the lower bound
    #[arg(long, default_value_t = 0.0, value_parser = format::parse_non_negative)]
    o_constant: f64,
    /// Smallest site probability p_L (with --p-upper, sets p_M for the lower bound)
    #[arg(long, requires = "p_upper", value_parser = format::parse_unit_open)]
    p_lower: Option<f64>,
    /// Largest site probability p_U
    #[arg(long, requires = "p_lower", value_parser = format::parse_unit_open)]
    p_upper: Option<f64>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("sites").required(true).args(["sensitive", "blackbox", "matrix"])))]
struct PlanArgs {
    /// Total sites n; taken from the matrix when --matrix is given
    #[arg(long, value_parser = format::parse_count, required_unless_present = "matrix")]
    n: Option<u64>,
    /// Sensitive sites s0
    #[arg(long, value_parser = format::parse_count)]
    sensitive: Option<u64>,
    /// Derive s0 = round(sqrt(n))
    #[arg(long)]
    blackbox: bool,
    /// Site semantics matrix file (JSON)
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// four | six | enough | lambda=<value>
    #[arg(long, value_parser = format::parse_target)]
    target: format::TargetArg,
}

#[derive(Debug, Args)]
struct MonitorArgs {
    /// JSON Lines event log; first line is the session header unless --session is given
    events: PathBuf,
    /// Session header file: {"n":..,"s0":..,"target":"four|six|enough|custom","lambda_rq":..}
    #[arg(long)]
    session: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[arg(long, value_parser = format::parse_count)]
    n: u64,
    #[arg(long, value_parser = format::parse_unit_open)]
    semantic_mean: f64,
    /// Number of coverage samples (at least 2)
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    resolution: u32,
    /// Output CSV path, or - for stdout
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct IndexArgs {
    /// Text files; each becomes a document keyed by its file name
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Index file to write
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    lowercase: bool,
    /// ws | ws+punct
    #[arg(long, default_value = "ws", value_parser = format::parse_delimiters)]
    delimiters: potrel_core::relevance::Delimiters,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("query_source").required(true).args(["text", "query_file"])))]
struct QueryArgs {
    /// Index file written by `potrel index`
    #[arg(long)]
    index: PathBuf,
    /// Query text
    text: Option<String>,
    /// Read the query from a file instead
    #[arg(long)]
    query_file: Option<PathBuf>,
    /// Print a tab-separated table instead of JSON
    #[arg(long)]
    table: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let out = format::Output {
        json: cli.json,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Bounds(a) => commands::bounds(
            &out,
            commands::BoundsInput {
                n: a.n,
                coverage: a.coverage,
                semantic_mean: a.semantic_mean,
                o_constant: a.o_constant,
                extremes: a.p_lower.zip(a.p_upper),
            },
        ),
        Command::Plan(a) => {
            let source = match (a.sensitive, a.blackbox, a.matrix) {
                (Some(s0), _, _) => commands::SiteSource::Sensitive(s0),
                (None, true, _) => commands::SiteSource::Blackbox,
                (None, false, Some(path)) => commands::SiteSource::Matrix(path),
                (None, false, None) => unreachable!("clap requires one site source"),
            };
            commands::plan(&out, a.n, source, a.target)
        }
        Command::Monitor(a) => commands::monitor(&out, &a.events, a.session.as_deref()),
        Command::Curve(a) => commands::curve(&out, a.n, a.semantic_mean, a.resolution, &a.out),
        Command::Index(a) => commands::index(
            &out,
            &a.inputs,
            &a.out,
            potrel_core::TokenizerConfig {
                lowercase: a.lowercase,
                delimiters: a.delimiters,
            },
        ),
        Command::Query(a) => {
            commands::query(&out, &a.index, a.text.as_deref(), a.query_file.as_deref(), a.table)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
