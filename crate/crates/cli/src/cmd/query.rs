use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use illusory_core::client::{run_evaluation, RunOptions, VlmClient};
use illusory_core::dataset::{load_manifest, Variant};

use crate::config::{apply, Paths, RunConfig};
use crate::Outcome;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    manifest: PathBuf,
    /// Predictions file; existing answers are kept and skipped.
    #[arg(long)]
    out: PathBuf,
    /// Which prompt to use; `filtered` also filters unfiltered images first.
    #[arg(long, default_value = "illusion")]
    variant: Variant,
    #[arg(long)]
    base_url: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the bearer token.
    #[arg(long)]
    token_env: Option<String>,
    #[arg(long)]
    max_concurrent: Option<usize>,
    #[arg(long)]
    retry_limit: Option<u32>,
    /// Per-request timeout in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Send gray images as 3-channel PNGs.
    #[arg(long)]
    rgb: bool,
}

pub fn run(args: Args, mut cfg: RunConfig, paths: &Paths) -> Result<Outcome> {
    let ep = &mut cfg.endpoint;
    apply(&mut ep.base_url, args.base_url);
    apply(&mut ep.model_name, args.model);
    apply(&mut ep.auth_token_env, args.token_env);
    apply(&mut ep.max_concurrent, args.max_concurrent);
    apply(&mut ep.retry_limit, args.retry_limit);
    apply(&mut ep.timeout, args.timeout);
    let client = VlmClient::from_env(cfg.endpoint.clone())?;

    let manifest_path = paths.resolve(&args.manifest);
    let manifest = load_manifest(&manifest_path)
        .with_context(|| format!("loading {}", manifest_path.display()))?;
    let out = paths.resolve(&args.out);
    cfg.echo(out.parent().unwrap_or(Path::new(".")))?;

    let opts = RunOptions {
        filter: cfg.filter,
        rgb: args.rgb,
    };
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let summary = run_evaluation(&client, &manifest, args.variant, base, &out, &opts)?;
    println!("{summary}");
    Ok(if summary.failures.is_empty() {
        Outcome::Ok
    } else {
        Outcome::ItemFailures
    })
}
