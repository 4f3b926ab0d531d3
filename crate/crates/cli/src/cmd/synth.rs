use std::path::PathBuf;

use anyhow::Result;
use illusory_core::synth::{generate_set_with, run_study_with, DEFAULT_THRESHOLD};
use rayon::prelude::*;

use crate::config::{apply, Paths, RunConfig};
use crate::Outcome;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Output directory for images/ and manifest.jsonl.
    #[arg(long)]
    out: PathBuf,
    /// Number of samples.
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    carrier_scale: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    no_illusion_fraction: Option<f64>,
    /// Also classify every sample with and without the filter.
    #[arg(long)]
    study: bool,
    /// Oracle rejection threshold for the study.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
}

pub fn run(args: Args, mut cfg: RunConfig, paths: &Paths) -> Result<Outcome> {
    let spec = &mut cfg.synth;
    apply(&mut spec.class_count, args.classes);
    apply(&mut spec.image_size, args.size);
    apply(&mut spec.alpha, args.alpha);
    apply(&mut spec.carrier_scale, args.carrier_scale);
    apply(&mut spec.seed, args.seed);
    apply(&mut spec.no_illusion_fraction, args.no_illusion_fraction);
    spec.validate()?;

    let out = paths.resolve(&args.out);
    cfg.echo(&out)?;
    let n = args.n;
    let manifest = generate_set_with(&cfg.synth, n, &out, |f| {
        (0..n).into_par_iter().map(f).collect()
    })?;
    println!("wrote {} samples to {}", manifest.len(), out.display());

    if args.study {
        let study = run_study_with(&cfg.synth, n, &cfg.filter, args.threshold, |f| {
            (0..n).into_par_iter().map(f).collect()
        })?;
        let table = study.to_table();
        std::fs::write(out.join("study.txt"), &table)?;
        std::fs::write(
            out.join("study.json"),
            serde_json::to_string_pretty(&study)? + "\n",
        )?;
        print!("{table}");
    }
    Ok(Outcome::Ok)
}
