//! `slsgle`: simulation studies, single fits, BIC tuning and index-tracking
//! backtests driven by TOML run files.

mod commands;
mod config;
mod data;

use std::fs;
use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use slsgle::RngSeed;

use commands::{Outcome, Run};
use config::RunConfig;

/// Sparse Laplacian shrinkage with a graphical-lasso graph.
///
/// Exit status: 0 on success, 2 when some cells, windows or fits failed but
/// outputs were written, 1 on any fatal error.
#[derive(Debug, Parser)]
#[command(name = "slsgle", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo study over scenarios, sample sizes and methods; writes
    /// raw.csv and summary.csv.
    Simulate(Common),
    /// One penalized fit at fixed tuning parameters; writes fit.json and
    /// coefficients.csv.
    Fit(Common),
    /// BIC grid search; writes selection.json, bic_table.csv and coefficients.csv.
    Tune(Common),
    /// Rolling-window index tracking; writes backtest.json and windows.csv.
    Backtest(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run file (schema_version = 1).
    #[arg(short, long)]
    config: PathBuf,
    /// Master seed; overrides `seed` in the run file. Only simulate and
    /// synthetic backtests draw random numbers.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads [default: one per core]. Results do not depend on it.
    #[arg(long)]
    threads: Option<NonZeroUsize>,
    /// Output directory, created if missing; overrides `output_dir` in the
    /// run file [default: out].
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
}

fn execute<C: RunConfig>(
    common: &Common,
    body: impl FnOnce(&Run<C>) -> Result<Outcome>,
) -> Result<Outcome> {
    let config: C = config::load(&common.config)?;
    if let Some(t) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.get())
            .build_global()
            .context("cannot start the worker pool")?;
    }
    let output_dir = common
        .output_dir
        .clone()
        .or_else(|| {
            config
                .output_dir()
                .map(|p| config::relative_to(&common.config, p))
        })
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&output_dir)
        .with_context(|| format!("cannot create {}", output_dir.display()))?;
    let seed = RngSeed(common.seed.or(config.seed()).unwrap_or(0));
    body(&Run {
        config,
        config_path: &common.config,
        seed,
        output_dir,
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Simulate(c) => execute(c, commands::simulate),
        Command::Fit(c) => execute(c, commands::fit),
        Command::Tune(c) => execute(c, commands::tune),
        Command::Backtest(c) => execute(c, commands::backtest),
    };
    match result {
        Ok(Outcome::Complete) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
