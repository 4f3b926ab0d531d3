use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use illusory_core::dataset::{load_manifest, Manifest, SampleRecord, Variant};
use illusory_core::imaging::io::{read_image, write_image};
use illusory_core::pipeline::reveal;
use rayon::prelude::*;

use crate::config::{apply, Paths, RunConfig};
use crate::Outcome;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// An image (png, pgm, ppm) or a manifest (.jsonl).
    input: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    gaussian_ksize: Option<usize>,
    #[arg(long)]
    box_kw: Option<usize>,
    #[arg(long)]
    box_kh: Option<usize>,
    #[arg(long)]
    median_ksize: Option<usize>,
    /// Write 3-channel output (gray replicated) for APIs that reject gray PNGs.
    #[arg(long)]
    rgb: bool,
}

fn filter_file(src: &Path, dst: &Path, cfg: &RunConfig, rgb: bool) -> Result<()> {
    let img = read_image(src)?;
    let mut out = reveal(&img.to_rgb(), &cfg.filter)?;
    if rgb {
        out = out.to_rgb();
    }
    write_image(dst, &out)?;
    Ok(())
}

fn is_manifest(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("jsonl" | "json")
    )
}

pub fn run(args: Args, mut cfg: RunConfig, paths: &Paths) -> Result<Outcome> {
    apply(&mut cfg.filter.gaussian_ksize, args.gaussian_ksize);
    apply(&mut cfg.filter.box_kw, args.box_kw);
    apply(&mut cfg.filter.box_kh, args.box_kh);
    apply(&mut cfg.filter.median_ksize, args.median_ksize);
    cfg.filter.validate()?;

    let input = paths.resolve(&args.input);
    let out_dir = paths.resolve(&args.out);
    cfg.echo(&out_dir)?;

    if !is_manifest(&input) {
        let stem = input.file_stem().context("input has no file name")?;
        let dst = out_dir.join(stem).with_extension("png");
        return match filter_file(&input, &dst, &cfg, args.rgb) {
            Ok(()) => {
                println!("1 ok, 0 failed");
                Ok(Outcome::Ok)
            }
            Err(e) => {
                eprintln!("failed: {}: {e:#}", input.display());
                println!("0 ok, 1 failed");
                Ok(Outcome::ItemFailures)
            }
        };
    }

    let manifest = load_manifest(&input).with_context(|| format!("loading {}", input.display()))?;
    let base = input.parent().unwrap_or(Path::new("."));
    let results: Vec<Result<SampleRecord, (String, anyhow::Error)>> = manifest
        .records
        .par_iter()
        .map(|record| {
            let rel = Path::new(&record.image_path).with_extension("png");
            filter_file(
                &base.join(&record.image_path),
                &out_dir.join(&rel),
                &cfg,
                args.rgb,
            )
            .map(|()| SampleRecord {
                image_path: rel.to_string_lossy().replace('\\', "/"),
                variant: Variant::Filtered,
                ..record.clone()
            })
            .map_err(|e| (record.image_path.clone(), e))
        })
        .collect();

    let mut kept = Vec::new();
    let mut failed = 0;
    for result in results {
        match result {
            Ok(record) => kept.push(record),
            Err((path, e)) => {
                failed += 1;
                eprintln!("failed: {path}: {e:#}");
            }
        }
    }
    let ok = kept.len();
    Manifest::new(manifest.labels.clone(), kept)?.write(out_dir.join("manifest.jsonl"))?;
    println!("{ok} ok, {failed} failed");
    Ok(if failed == 0 {
        Outcome::Ok
    } else {
        Outcome::ItemFailures
    })
}
