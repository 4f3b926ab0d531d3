//! Joining predictions against a manifest and rendering the result.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::{
    build_confusion, classification_report, seq_eval_report, ClassificationReport, ConfusionMatrix,
    MetricsError, SeqEvalReport,
};
use crate::dataset::{
    normalize_answer, Answer, Manifest, Prediction, PredictionRecord, SampleKind, NO_ILLUSION,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction for unknown sample id `{0}`")]
    UnknownSampleId(String),
    #[error("more than one prediction for sample id `{0}`")]
    DuplicatePrediction(String),
    #[error("kind mismatch: {0}")]
    KindMismatch(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationSection {
    /// Covered predictions that entered the confusion matrix.
    pub scored: usize,
    pub confusion: ConfusionMatrix,
    /// Absent when nothing could be scored.
    pub report: Option<ClassificationReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSection {
    /// Samples with a character-string answer and a character-string truth.
    pub scored: usize,
    /// Answers that said "No illusion" (not covered for WER/CER).
    pub no_illusion_answers: usize,
    /// Samples whose truth is "No illusion".
    pub no_illusion_samples: usize,
    /// Of those, how many were answered "No illusion".
    pub no_illusion_correct: usize,
    pub report: Option<SeqEvalReport>,
}

/// Everything `evaluate` reports about one predictions file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub dataset: String,
    pub kind: SampleKind,
    pub samples: usize,
    pub predictions: usize,
    /// Manifest samples without a prediction.
    pub missing: usize,
    pub coverage: Option<f64>,
    pub classification: Option<ClassificationSection>,
    pub sequence: Option<SequenceSection>,
}

/// Scores `predictions` against `manifest`.
///
/// Uncovered answers count only toward coverage. Samples are visited in
/// manifest order, so the order of `predictions` never matters.
pub fn evaluate(
    manifest: &Manifest,
    predictions: &[PredictionRecord],
    kind: Option<SampleKind>,
) -> Result<MetricsReport, EvalError> {
    let manifest_kind = match (manifest.kind(), manifest.is_empty()) {
        (Some(k), _) => Some(k),
        (None, true) => None,
        (None, false) => {
            return Err(EvalError::KindMismatch(
                "manifest mixes sample kinds".into(),
            ));
        }
    };
    let kind = match (kind, manifest_kind) {
        (Some(want), Some(have)) if want != have => {
            return Err(EvalError::KindMismatch(format!(
                "requested {want} scoring but the manifest holds {have} samples"
            )));
        }
        (Some(k), _) | (None, Some(k)) => k,
        (None, None) => SampleKind::Classification,
    };
    let labels = manifest.labels.as_ref();
    if kind == SampleKind::Classification && labels.is_none() {
        return Err(EvalError::KindMismatch(
            "classification scoring needs a manifest label set".into(),
        ));
    }

    let mut by_id: HashMap<&str, &PredictionRecord> = HashMap::with_capacity(predictions.len());
    for p in predictions {
        if manifest.get(&p.sample_id).is_none() {
            return Err(EvalError::UnknownSampleId(p.sample_id.clone()));
        }
        if by_id.insert(p.sample_id.as_str(), p).is_some() {
            return Err(EvalError::DuplicatePrediction(p.sample_id.clone()));
        }
    }

    let mut scored = Vec::new();
    let mut missing = 0;
    for record in &manifest.records {
        let Some(p) = by_id.get(record.id.as_str()) else {
            missing += 1;
            continue;
        };
        let prediction = Prediction {
            sample_id: record.id.clone(),
            raw_text: p.raw_text.clone(),
            normalized: normalize_answer(&p.raw_text, kind, labels),
        };
        scored.push((record, prediction));
    }

    let preds: Vec<Prediction> = scored.iter().map(|(_, p)| p.clone()).collect();
    let coverage = super::coverage(&preds).ok();

    let mut report = MetricsReport {
        dataset: labels.map_or_else(|| "char".to_string(), |l| l.name.clone()),
        kind,
        samples: manifest.len(),
        predictions: preds.len(),
        missing,
        coverage,
        classification: None,
        sequence: None,
    };

    match kind {
        SampleKind::Classification => {
            let labels = labels.expect("checked above");
            let pairs: Vec<(&str, &str)> = scored
                .iter()
                .filter_map(|(r, p)| p.normalized.label().map(|l| (r.true_label.as_str(), l)))
                .collect();
            let confusion = build_confusion(&pairs, labels)?;
            let class_report = if pairs.is_empty() {
                None
            } else {
                Some(classification_report(&confusion)?)
            };
            report.classification = Some(ClassificationSection {
                scored: pairs.len(),
                confusion,
                report: class_report,
            });
        }
        SampleKind::Char => {
            let mut refs = Vec::new();
            let mut hyps = Vec::new();
            let mut section = SequenceSection {
                scored: 0,
                no_illusion_answers: 0,
                no_illusion_samples: 0,
                no_illusion_correct: 0,
                report: None,
            };
            for (record, p) in &scored {
                let truth_is_none = record.true_label == NO_ILLUSION;
                let said_none = p.normalized == Answer::NoIllusion;
                section.no_illusion_answers += usize::from(said_none);
                section.no_illusion_samples += usize::from(truth_is_none);
                section.no_illusion_correct += usize::from(truth_is_none && said_none);
                if let (false, Answer::Label(text)) = (truth_is_none, &p.normalized) {
                    refs.push(record.true_label.as_str());
                    hyps.push(text.as_str());
                }
            }
            section.scored = refs.len();
            if !refs.is_empty() {
                section.report = Some(seq_eval_report(&refs, &hyps)?);
            }
            report.sequence = Some(section);
        }
    }
    Ok(report)
}

pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Rebuilds objects with sorted keys and rounds every float to 2 decimals.
fn canonicalize(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let sorted: BTreeMap<String, Value> =
                map.into_iter().map(|(k, v)| (k, canonicalize(v))).collect();
            Value::Object(sorted.into_iter().collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        Value::Number(n) if n.is_f64() => {
            let x = round2(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        other => other,
    }
}

impl MetricsReport {
    /// Key-sorted, pretty-printed JSON with two-decimal percentages.
    /// Identical reports always produce identical bytes.
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut text =
            serde_json::to_string_pretty(&canonicalize(value)).expect("value serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Human-readable rendering.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let pct = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
        let _ = writeln!(out, "dataset     {} ({})", self.dataset, self.kind);
        let _ = writeln!(
            out,
            "samples     {}  predictions {}  missing {}",
            self.samples, self.predictions, self.missing
        );
        let _ = writeln!(out, "coverage    {}", pct(self.coverage));
        if let Some(section) = &self.classification {
            let r = section.report.as_ref();
            let _ = writeln!(out);
            let _ = writeln!(
                out,
                "{:>10} {:>10} {:>10} {:>10}",
                "Accuracy", "Precision", "Recall", "F1"
            );
            let _ = writeln!(
                out,
                "{:>10} {:>10} {:>10} {:>10}",
                pct(r.map(|r| r.accuracy)),
                pct(r.map(|r| r.macro_precision)),
                pct(r.map(|r| r.macro_recall)),
                pct(r.map(|r| r.macro_f1)),
            );
            if let Some(r) = r {
                let width = r
                    .per_class
                    .iter()
                    .map(|c| c.label.len())
                    .max()
                    .unwrap_or(5)
                    .max(5);
                let _ = writeln!(out);
                let _ = writeln!(
                    out,
                    "{:<width$} {:>10} {:>10} {:>10} {:>8}",
                    "label", "precision", "recall", "f1", "support"
                );
                for c in &r.per_class {
                    let _ = writeln!(
                        out,
                        "{:<width$} {:>10.2} {:>10.2} {:>10.2} {:>8}",
                        c.label, c.precision, c.recall, c.f1, c.support
                    );
                }
            }
        }
        if let Some(section) = &self.sequence {
            let r = section.report.as_ref();
            let _ = writeln!(out);
            let _ = writeln!(out, "{:>10} {:>10} {:>8}", "WER", "CER", "scored");
            let _ = writeln!(
                out,
                "{:>10} {:>10} {:>8}",
                pct(r.map(|r| r.wer)),
                pct(r.map(|r| r.cer)),
                section.scored
            );
            let _ = writeln!(
                out,
                "no-illusion answers {}  (correct {} of {} no-illusion samples)",
                section.no_illusion_answers,
                section.no_illusion_correct,
                section.no_illusion_samples
            );
        }
        out
    }
}

/// One line per report, columns laid out like a results table.
pub fn summary_table(rows: &[(String, MetricsReport)]) -> String {
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(4).max(4);
    let pct = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "name", "coverage", "accuracy", "precision", "recall", "f1", "wer", "cer"
    );
    for (name, r) in rows {
        let class = r.classification.as_ref().and_then(|s| s.report.as_ref());
        let seq = r.sequence.as_ref().and_then(|s| s.report.as_ref());
        let _ = writeln!(
            out,
            "{:<width$} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
            name,
            pct(r.coverage),
            pct(class.map(|c| c.accuracy)),
            pct(class.map(|c| c.macro_precision)),
            pct(class.map(|c| c.macro_recall)),
            pct(class.map(|c| c.macro_f1)),
            pct(seq.map(|s| s.wer)),
            pct(seq.map(|s| s.cer)),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{parse_manifest, SampleRecord, Split, Variant};

    fn manifest() -> Manifest {
        parse_manifest(
            r#"{"labels":{"name":"toy","classes":["A","B"],"includes_no_illusion":false}}
{"id":"1","image_path":"1.png","variant":"illusion","kind":"classification","true_label":"A","split":"test"}
{"id":"2","image_path":"2.png","variant":"illusion","kind":"classification","true_label":"A","split":"test"}
{"id":"3","image_path":"3.png","variant":"illusion","kind":"classification","true_label":"B","split":"test"}
{"id":"4","image_path":"4.png","variant":"illusion","kind":"classification","true_label":"B","split":"test"}
"#,
        )
        .unwrap()
    }

    fn p(id: &str, text: &str) -> PredictionRecord {
        PredictionRecord {
            sample_id: id.into(),
            raw_text: text.into(),
        }
    }

    #[test]
    fn scores_and_excludes_uncovered() {
        let preds = [p("1", "A"), p("2", "b"), p("3", "B."), p("4", "unsure")];
        let r = evaluate(&manifest(), &preds, None).unwrap();
        assert_eq!(r.coverage, Some(75.0));
        let section = r.classification.unwrap();
        assert_eq!(section.scored, 3);
        assert_eq!(section.confusion.counts, vec![vec![1, 1], vec![0, 1]]);
    }

    #[test]
    fn unknown_id_rejected() {
        assert!(matches!(
            evaluate(&manifest(), &[p("9", "A")], None),
            Err(EvalError::UnknownSampleId(id)) if id == "9"
        ));
    }

    #[test]
    fn kind_mismatch_rejected() {
        assert!(matches!(
            evaluate(&manifest(), &[], Some(SampleKind::Char)),
            Err(EvalError::KindMismatch(_))
        ));
    }

    #[test]
    fn missing_predictions_counted() {
        let r = evaluate(&manifest(), &[p("1", "A")], None).unwrap();
        assert_eq!(r.missing, 3);
        assert_eq!(r.predictions, 1);
    }

    #[test]
    fn char_scoring_tracks_no_illusion() {
        let records = vec![
            ("c1", "abc", "\"abd\""),
            ("c2", "No illusion", "No illusion"),
            ("c3", "xyz", "No illusion"),
        ]
        .into_iter()
        .map(|(id, truth, _)| SampleRecord {
            id: id.into(),
            image_path: format!("{id}.png"),
            variant: Variant::Illusion,
            kind: SampleKind::Char,
            true_label: truth.into(),
            split: Split::Test,
        })
        .collect();
        let m = Manifest::new(None, records).unwrap();
        let preds = [
            p("c1", "\"abd\""),
            p("c2", "No illusion"),
            p("c3", "No illusion"),
        ];
        let r = evaluate(&m, &preds, None).unwrap();
        let s = r.sequence.unwrap();
        assert_eq!(s.scored, 1);
        assert_eq!(s.no_illusion_answers, 2);
        assert_eq!(s.no_illusion_correct, 1);
        let seq = s.report.unwrap();
        assert!((seq.cer - 100.0 / 3.0).abs() < 1e-12);
        assert_eq!(seq.wer, 100.0);
    }

    #[test]
    fn canonical_json_sorts_and_rounds() {
        let preds = [p("1", "A"), p("2", "B"), p("3", "B"), p("4", "B")];
        let r = evaluate(&manifest(), &preds, None).unwrap();
        let text = r.to_canonical_json();
        assert!(text.contains("\"macro_precision\": 83.33"));
        let classification = text.find("\"classification\"").unwrap();
        let coverage = text.find("\"coverage\"").unwrap();
        let dataset = text.find("\"dataset\"").unwrap();
        assert!(classification < coverage && coverage < dataset);
        let back = MetricsReport::from_json(&text).unwrap();
        assert_eq!(back.to_canonical_json(), text);
    }
}
