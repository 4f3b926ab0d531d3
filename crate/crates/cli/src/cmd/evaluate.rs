use std::path::PathBuf;

use anyhow::{Context, Result};
use illusory_core::dataset::{load_manifest, load_predictions, SampleKind};
use illusory_core::metrics::report::evaluate;

use crate::config::{Paths, RunConfig};
use crate::Outcome;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    predictions: PathBuf,
    /// Directory for report.json and report.txt.
    #[arg(long)]
    out: PathBuf,
    /// Scoring mode; defaults to the manifest's sample kind.
    #[arg(long)]
    kind: Option<SampleKind>,
}

pub fn run(args: Args, cfg: RunConfig, paths: &Paths) -> Result<Outcome> {
    let manifest_path = paths.resolve(&args.manifest);
    let preds_path = paths.resolve(&args.predictions);
    let manifest = load_manifest(&manifest_path)
        .with_context(|| format!("loading {}", manifest_path.display()))?;
    if !preds_path.exists() {
        anyhow::bail!("predictions file {} not found", preds_path.display());
    }
    let preds = load_predictions(&preds_path)
        .with_context(|| format!("loading {}", preds_path.display()))?;
    let report = evaluate(&manifest, &preds, args.kind)?;

    let out = paths.resolve(&args.out);
    cfg.echo(&out)?;
    std::fs::write(out.join("report.json"), report.to_canonical_json())?;
    let table = report.to_table();
    std::fs::write(out.join("report.txt"), &table)?;
    print!("{table}");
    Ok(Outcome::Ok)
}
