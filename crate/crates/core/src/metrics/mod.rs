//! Classification and reading-accuracy metrics.
//!
//! All rates are percentages. Values are kept at full precision in the
//! report structs; [`report`] rounds them to two decimals when writing files.

pub mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{LabelSet, Prediction};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("reference {index} is empty")]
    EmptyReference { index: usize },
    #[error("{refs} references but {hyps} hypotheses")]
    LengthMismatch { refs: usize, hyps: usize },
    #[error("no references given")]
    NoReferences,
    #[error("label `{0}` is not in the label set")]
    UnknownLabel(String),
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("no predictions given")]
    EmptyInput,
}

/// Unit-cost edit distance between two sequences.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let substitution = prev[j] + usize::from(x != y);
            cur[j + 1] = substitution.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Corpus-level error rate: total edits over total reference length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRate {
    pub rate: f64,
    pub edits: usize,
    pub reference_len: usize,
}

fn corpus_rate<S: AsRef<str>, T: PartialEq>(
    refs: &[S],
    hyps: &[S],
    split: impl Fn(&str) -> Vec<T>,
) -> Result<ErrorRate, MetricsError> {
    if refs.len() != hyps.len() {
        return Err(MetricsError::LengthMismatch {
            refs: refs.len(),
            hyps: hyps.len(),
        });
    }
    if refs.is_empty() {
        return Err(MetricsError::NoReferences);
    }
    let mut edits = 0;
    let mut reference_len = 0;
    for (index, (r, h)) in refs.iter().zip(hyps).enumerate() {
        let r = split(r.as_ref());
        if r.is_empty() {
            return Err(MetricsError::EmptyReference { index });
        }
        edits += levenshtein(&r, &split(h.as_ref()));
        reference_len += r.len();
    }
    Ok(ErrorRate {
        rate: 100.0 * edits as f64 / reference_len as f64,
        edits,
        reference_len,
    })
}

/// Character error rate over Unicode scalar values. May exceed 100.
pub fn cer_corpus<S: AsRef<str>>(refs: &[S], hyps: &[S]) -> Result<ErrorRate, MetricsError> {
    corpus_rate(refs, hyps, |s| s.chars().collect::<Vec<char>>())
}

/// Word error rate with whitespace tokenization. May exceed 100.
pub fn wer_corpus<S: AsRef<str>>(refs: &[S], hyps: &[S]) -> Result<ErrorRate, MetricsError> {
    corpus_rate(refs, hyps, |s| {
        s.split_whitespace()
            .map(str::to_owned)
            .collect::<Vec<String>>()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeqEvalReport {
    pub wer: f64,
    pub cer: f64,
    pub total_ref_words: usize,
    pub total_ref_chars: usize,
    pub total_word_edits: usize,
    pub total_char_edits: usize,
}

pub fn seq_eval_report<S: AsRef<str>>(
    refs: &[S],
    hyps: &[S],
) -> Result<SeqEvalReport, MetricsError> {
    let wer = wer_corpus(refs, hyps)?;
    let cer = cer_corpus(refs, hyps)?;
    Ok(SeqEvalReport {
        wer: wer.rate,
        cer: cer.rate,
        total_ref_words: wer.reference_len,
        total_ref_chars: cer.reference_len,
        total_word_edits: wer.edits,
        total_char_edits: cer.edits,
    })
}

/// Rows are true labels, columns predicted labels, both in label-set order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(labels: &LabelSet) -> Self {
        let labels: Vec<String> = labels.labels().into_iter().map(String::from).collect();
        let n = labels.len();
        ConfusionMatrix {
            labels,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        self.counts.iter().map(|row| row[j]).sum()
    }
}

pub fn build_confusion<S: AsRef<str>>(
    pairs: &[(S, S)],
    labels: &LabelSet,
) -> Result<ConfusionMatrix, MetricsError> {
    let mut cm = ConfusionMatrix::zeros(labels);
    let index = |l: &str| {
        labels
            .index_of(l)
            .ok_or_else(|| MetricsError::UnknownLabel(l.to_string()))
    };
    for (truth, predicted) in pairs {
        let i = index(truth.as_ref())?;
        let j = index(predicted.as_ref())?;
        cm.counts[i][j] += 1;
    }
    Ok(cm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassStats>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Accuracy plus unweighted (macro) precision, recall and F1 over every label
/// of the matrix. A statistic whose denominator is zero counts as 0.
pub fn classification_report(cm: &ConfusionMatrix) -> Result<ClassificationReport, MetricsError> {
    let total = cm.total();
    if total == 0 {
        return Err(MetricsError::EmptyMatrix);
    }
    let per_class: Vec<ClassStats> = cm
        .labels
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let tp = cm.counts[i][i];
            let precision = ratio(tp, cm.col_sum(i));
            let recall = ratio(tp, cm.row_sum(i));
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassStats {
                label: label.clone(),
                precision: 100.0 * precision,
                recall: 100.0 * recall,
                f1: 100.0 * f1,
                support: cm.row_sum(i),
            }
        })
        .collect();
    let n = per_class.len() as f64;
    let mean = |f: fn(&ClassStats) -> f64| per_class.iter().map(f).sum::<f64>() / n;
    Ok(ClassificationReport {
        accuracy: 100.0 * cm.trace() as f64 / total as f64,
        macro_precision: mean(|c| c.precision),
        macro_recall: mean(|c| c.recall),
        macro_f1: mean(|c| c.f1),
        per_class,
    })
}

/// Percentage of predictions whose answer normalized to something scoreable.
pub fn coverage(preds: &[Prediction]) -> Result<f64, MetricsError> {
    if preds.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let covered = preds.iter().filter(|p| p.is_covered()).count();
    Ok(100.0 * covered as f64 / preds.len() as f64)
}
