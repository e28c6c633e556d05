mod commands;
mod config;
mod error;
mod run;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Context, PlotKind, SimKind};
use error::{CliError, CliResult};

/// Design and analysis pipeline for crowd-sourced annotation campaigns.
#[derive(Parser)]
#[command(name = "tg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Seed for every random draw; required by stochastic commands.
    #[arg(long)]
    seed: Option<u64>,
    /// Override a config value, e.g. `--set agreement.n_target=5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory, instead of `paths.out_dir`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw the stratified sample B, the enriched sample F, A = B ∪ F and the expert subset E.
    Sample(Common),
    /// Estimate importance weights for A.
    Weigh(Common),
    /// Validate annotations and emit majority labels and crowd scores.
    Aggregate(Common),
    /// Agreement report, per-tweet kappa and simplex scatter per cohort.
    Agree(Common),
    /// PR curves, F1* and AP for every classifier and the crowd.
    Evaluate(Common),
    /// Perfect-agreement and chance-only baselines.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Baselines to run; both when omitted.
        #[arg(value_enum)]
        kinds: Vec<SimKind>,
    },
    /// Generate the synthetic campaign described by the config's `fixture` section.
    Fixture(Common),
    /// Render a simplex or PR-curve CSV as SVG.
    Plot {
        #[arg(long, value_enum)]
        kind: PlotKind,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn context(common: Common) -> CliResult<Context> {
    let loaded = config::load(&common.config, &common.overrides)?;
    Ok(Context::new(loaded, common.seed, common.out_dir))
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("TG_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("TG_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Sample(c) => commands::sample(&context(c)?),
        Command::Weigh(c) => commands::weigh(&context(c)?),
        Command::Aggregate(c) => commands::aggregate(&context(c)?),
        Command::Agree(c) => commands::agree(&context(c)?),
        Command::Evaluate(c) => commands::evaluate(&context(c)?),
        Command::Simulate { common, kinds } => commands::simulate(&context(common)?, &kinds),
        Command::Fixture(c) => commands::fixture(&context(c)?),
        Command::Plot { kind, data, out } => commands::plot(kind, &data, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
