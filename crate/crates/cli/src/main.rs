//! Batch command line: ingestion, backtesting, feature extraction and the
//! relationship/predictability analyses, each independently re-runnable.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

mod pipeline;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use pipeline::{PipelineError, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "medcast", version, about = "Median-combination forecasting benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Long-format series table (station_id, year, value)
    #[arg(long)]
    data: PathBuf,
    /// Station metadata table (station_id, longitude, latitude, ...)
    #[arg(long)]
    meta: PathBuf,
    /// Output directory for artifact tables
    #[arg(long)]
    out: PathBuf,
    /// Run seed; the MEDCAST_SEED environment variable overrides it
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Station-level parallelism degree
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// TOML file with region boxes and country mapping
    #[arg(long)]
    region_config: Option<PathBuf>,
    /// Method subset: comma-separated base names/numbers and combos like 1+4+5
    /// (default: all 31; the benchmark is always included)
    #[arg(long)]
    methods: Option<String>,
    /// Metric subset: comma-separated names (default: all five)
    #[arg(long)]
    metrics: Option<String>,
    /// Mirror each table as a JSON records array
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Validate, select and region-tag the input archive
    Ingest(CommonArgs),
    /// Run the rolling-origin backtest and write evaluation tables
    Evaluate(CommonArgs),
    /// Compute the per-station river-flow statistics
    Features(CommonArgs),
    /// Regressions, correlations and the predictability summary
    Analyze(CommonArgs),
    /// Full pipeline: ingest, evaluate, features, analyze
    Run(CommonArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    let (phase, args) = match &cli.command {
        Command::Ingest(a) => (pipeline::Phase::Ingest, a),
        Command::Evaluate(a) => (pipeline::Phase::Evaluate, a),
        Command::Features(a) => (pipeline::Phase::Features, a),
        Command::Analyze(a) => (pipeline::Phase::Analyze, a),
        Command::Run(a) => (pipeline::Phase::Run, a),
    };

    let config = match build_config(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("medcast: {e}");
            return ExitCode::from(1);
        }
    };

    match pipeline::run_pipeline(phase, &config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(PipelineError::Data(e)) => {
            eprintln!("medcast: {e}");
            ExitCode::from(2)
        }
    }
}

fn build_config(args: &CommonArgs) -> Result<RunConfig, String> {
    let seed = match std::env::var("MEDCAST_SEED") {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map_err(|_| format!("MEDCAST_SEED must be an unsigned integer, got '{v}'"))?,
        Err(_) => args.seed,
    };
    RunConfig::new(
        args.data.clone(),
        args.meta.clone(),
        args.out.clone(),
        seed,
        args.jobs,
        args.region_config.as_deref(),
        args.methods.as_deref(),
        args.metrics.as_deref(),
        args.json,
    )
}
