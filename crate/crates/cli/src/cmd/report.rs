use std::path::PathBuf;

use anyhow::{Context, Result};
use illusory_core::metrics::report::{summary_table, MetricsReport};

use crate::config::Paths;
use crate::Outcome;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// report.json files, or directories containing one.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    /// Also write the table to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args, paths: &Paths) -> Result<Outcome> {
    let mut rows = Vec::new();
    for given in &args.reports {
        let mut path = paths.resolve(given);
        if path.is_dir() {
            path = path.join("report.json");
        }
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        let report = MetricsReport::from_json(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        let name = match path.file_name().and_then(|f| f.to_str()) {
            Some("report.json") => path.parent().and_then(|p| p.file_name()),
            _ => path.file_stem(),
        };
        let name = name.map_or_else(
            || given.display().to_string(),
            |n| n.to_string_lossy().into_owned(),
        );
        rows.push((name, report));
    }
    let table = summary_table(&rows);
    if let Some(out) = &args.out {
        let out = paths.resolve(out);
        if let Some(parent) = out.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&out, &table)?;
    }
    print!("{table}");
    Ok(Outcome::Ok)
}
