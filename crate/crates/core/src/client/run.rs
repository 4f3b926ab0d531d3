use std::collections::{BTreeMap, HashSet};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use super::{build_prompt, ClientError, FailureReason, QueryResult, VlmClient};
use crate::dataset::{load_predictions, Manifest, PredictionRecord, SampleRecord, Variant};
use crate::imaging::io::read_image;
use crate::imaging::{ImageBuffer, ImagingError};
use crate::pipeline::{reveal, FilterConfig};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Used when `filtered` is requested for images that are not yet filtered.
    pub filter: FilterConfig,
    /// Send gray images as 3-channel RGB.
    pub rgb: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub total: usize,
    /// Samples already present in the output file.
    pub skipped: usize,
    /// Samples sent to the endpoint during this run.
    pub queried: usize,
    /// HTTP attempts, retries included.
    pub attempts: u64,
    pub succeeded: usize,
    pub failures: Vec<(String, FailureReason)>,
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} samples, {} already answered, {} new requests ({} attempts), {} ok, {} failed",
            self.total,
            self.skipped,
            self.queried,
            self.attempts,
            self.succeeded,
            self.failures.len()
        )?;
        for (id, reason) in &self.failures {
            write!(f, "\n  {id}: {reason}")?;
        }
        Ok(())
    }
}

/// Loads the image for `record` as it should be sent for `variant`.
///
/// Asking for `filtered` on an image that is not already filtered runs the
/// reveal pipeline on the fly.
pub fn prepare_image(
    record: &SampleRecord,
    variant: Variant,
    root: &Path,
    opts: &RunOptions,
) -> Result<ImageBuffer, ImagingError> {
    let mut img = read_image(root.join(&record.image_path))?;
    if variant == Variant::Filtered && record.variant != Variant::Filtered {
        img = reveal(&img.to_rgb(), &opts.filter)?;
    }
    if opts.rgb {
        img = img.to_rgb();
    }
    Ok(img)
}

fn query_record(
    client: &VlmClient,
    manifest: &Manifest,
    record: &SampleRecord,
    variant: Variant,
    root: &Path,
    opts: &RunOptions,
) -> QueryResult {
    let failed = |reason| QueryResult {
        sample_id: record.id.clone(),
        outcome: Err(reason),
        latency: 0.0,
        attempt_count: 0,
    };
    let prompt = match build_prompt(record.kind, variant, manifest.labels.as_ref()) {
        Ok(p) => p,
        Err(e) => return failed(FailureReason::Image(e.to_string())),
    };
    match prepare_image(record, variant, root, opts) {
        Ok(img) => client.query_image(&record.id, &img, &prompt),
        Err(e) => failed(FailureReason::Image(e.to_string())),
    }
}

/// Queries every manifest sample not yet present in `output_path` and
/// appends one prediction line per success.
///
/// Samples are processed in sample-id order and lines are written in that
/// order regardless of completion order. At most `max_concurrent` requests
/// are in flight. Per-sample failures are collected in the summary and are
/// retried by the next run.
pub fn run_evaluation(
    client: &VlmClient,
    manifest: &Manifest,
    variant: Variant,
    root: &Path,
    output_path: &Path,
    opts: &RunOptions,
) -> Result<RunSummary, ClientError> {
    let done: HashSet<String> = load_predictions(output_path)?
        .into_iter()
        .map(|p| p.sample_id)
        .collect();
    let mut pending: Vec<&SampleRecord> = manifest
        .records
        .iter()
        .filter(|r| !done.contains(&r.id))
        .collect();
    pending.sort_by(|a, b| a.id.cmp(&b.id));

    let mut summary = RunSummary {
        total: manifest.len(),
        skipped: manifest.len() - pending.len(),
        ..Default::default()
    };

    if let Some(parent) = output_path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut out = OpenOptions::new()
        .create(true)
        .append(true)
        .open(output_path)?;
    if pending.is_empty() {
        return Ok(summary);
    }

    let workers = client.config().max_concurrent.min(pending.len());
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, QueryResult)>();

    std::thread::scope(|scope| -> Result<(), ClientError> {
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, pending) = (&next, &pending);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(record) = pending.get(i) else { break };
                let result = query_record(client, manifest, record, variant, root, opts);
                if tx.send((i, result)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut buffered = BTreeMap::new();
        let mut cursor = 0;
        for (i, result) in rx {
            buffered.insert(i, result);
            while let Some(result) = buffered.remove(&cursor) {
                cursor += 1;
                summary.queried += 1;
                summary.attempts += u64::from(result.attempt_count);
                match result.outcome {
                    Ok(raw_text) => {
                        let line = PredictionRecord {
                            sample_id: result.sample_id,
                            raw_text,
                        };
                        line.write_line(&mut out)?;
                        out.flush()?;
                        summary.succeeded += 1;
                    }
                    Err(reason) => summary.failures.push((result.sample_id, reason)),
                }
            }
        }
        Ok(())
    })?;
    Ok(summary)
}
