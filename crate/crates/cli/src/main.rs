//! `illusory`: reveal filter, synthetic illusions, endpoint queries and scoring.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

mod cmd;
mod config;

use config::{Paths, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "illusory",
    version,
    about = "Illusion-revealing filter and VQA evaluation toolkit"
)]
struct Cli {
    /// TOML file with [filter], [endpoint] and [synth] tables. Flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Base directory for relative paths.
    #[arg(long, global = true)]
    root: Option<PathBuf>,

    /// Worker threads for per-item parallelism (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Apply the reveal filter to an image or to every image of a manifest.
    Filter(cmd::filter::Args),
    /// Score a predictions file against a manifest.
    Evaluate(cmd::evaluate::Args),
    /// Generate a synthetic illusion set, optionally with the filter study.
    Synth(cmd::synth::Args),
    /// Ask a vision-chat endpoint about every sample of a manifest.
    Query(cmd::query::Args),
    /// Tabulate several report.json files side by side.
    Report(cmd::report::Args),
}

/// What a command wants the process to report.
pub enum Outcome {
    Ok,
    /// Some items failed; the command already printed which.
    ItemFailures,
}

fn run(cli: Cli) -> Result<Outcome> {
    let config = RunConfig::load(cli.config.as_deref())?;
    let paths = Paths::new(cli.root);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        pool = pool.num_threads(jobs.max(1));
    }
    let pool = pool.build().context("starting worker pool")?;
    pool.install(|| match cli.command {
        Command::Filter(args) => cmd::filter::run(args, config, &paths),
        Command::Evaluate(args) => cmd::evaluate::run(args, config, &paths),
        Command::Synth(args) => cmd::synth::run(args, config, &paths),
        Command::Query(args) => cmd::query::run(args, config, &paths),
        Command::Report(args) => cmd::report::run(args, &paths),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ItemFailures) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
