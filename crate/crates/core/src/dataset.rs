//! Label sets, manifests, prediction files and answer normalization.
//!
//! # File formats
//!
//! Both files are UTF-8 JSON lines. A **manifest** starts with a header line
//! binding the label set, followed by one sample per line:
//!
//! ```text
//! {"labels":{"name":"IllusionAnimals","classes":["cat","dog"],"includes_no_illusion":true}}
//! {"id":"a1","image_path":"img/a1.png","variant":"illusion","kind":"classification","true_label":"dog","split":"test"}
//! ```
//!
//! The header may also name a built-in set, `{"labels":{"builtin":"IllusionAnimals","no_illusion":true}}`,
//! or be `{"labels":null}` for character-reading manifests. A **predictions**
//! file holds one `{"sample_id":...,"raw_text":...}` object per line.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The extra class for images that hide nothing.
pub const NO_ILLUSION: &str = "No illusion";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown label `{label}`")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("invalid label set: {0}")]
    InvalidLabelSet(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An ordered set of class names, optionally extended with [`NO_ILLUSION`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    pub name: String,
    classes: Vec<String>,
    includes_no_illusion: bool,
}

impl LabelSet {
    /// `classes` lists the concept classes only; `"No illusion"` is appended
    /// automatically when `includes_no_illusion` is set.
    pub fn new(
        name: impl Into<String>,
        classes: Vec<String>,
        includes_no_illusion: bool,
    ) -> Result<Self, DatasetError> {
        let set = LabelSet {
            name: name.into(),
            classes,
            includes_no_illusion,
        };
        set.check()?;
        Ok(set)
    }

    fn check(&self) -> Result<(), DatasetError> {
        if self.classes.is_empty() {
            return Err(DatasetError::InvalidLabelSet("no classes".into()));
        }
        let mut seen = HashSet::new();
        for class in &self.classes {
            if class.trim().is_empty() {
                return Err(DatasetError::InvalidLabelSet("empty class name".into()));
            }
            if class.eq_ignore_ascii_case(NO_ILLUSION) {
                return Err(DatasetError::InvalidLabelSet(format!(
                    "`{NO_ILLUSION}` is controlled by the includes_no_illusion flag"
                )));
            }
            if !seen.insert(class.to_lowercase()) {
                return Err(DatasetError::InvalidLabelSet(format!(
                    "duplicate class `{class}`"
                )));
            }
        }
        Ok(())
    }

    /// The same classes with the no-illusion flag set or cleared.
    pub fn with_no_illusion(&self, flag: bool) -> LabelSet {
        LabelSet {
            includes_no_illusion: flag,
            ..self.clone()
        }
    }

    /// Concept classes, without `"No illusion"`.
    pub fn concept_classes(&self) -> &[String] {
        &self.classes
    }

    pub fn includes_no_illusion(&self) -> bool {
        self.includes_no_illusion
    }

    /// All labels in scoring order; `"No illusion"` is last when present.
    pub fn labels(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.classes.iter().map(String::as_str).collect();
        if self.includes_no_illusion {
            out.push(NO_ILLUSION);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.classes.len() + usize::from(self.includes_no_illusion)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        if self.includes_no_illusion && label == NO_ILLUSION {
            return Some(self.classes.len());
        }
        self.classes.iter().position(|c| c == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index_of(label).is_some()
    }

    /// Re-orders the label list (used to check permutation invariance).
    pub fn permuted(&self, order: &[usize]) -> LabelSet {
        LabelSet {
            name: self.name.clone(),
            classes: order.iter().map(|&i| self.classes[i].clone()).collect(),
            includes_no_illusion: self.includes_no_illusion,
        }
    }
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

const MNIST: [&str; 10] = [
    "digit 0", "digit 1", "digit 2", "digit 3", "digit 4", "digit 5", "digit 6", "digit 7",
    "digit 8", "digit 9",
];
const FASHION: [&str; 10] = [
    "t-shirt/top",
    "trouser",
    "pullover",
    "dress",
    "coat",
    "sandal",
    "shirt",
    "sneaker",
    "bag",
    "ankle boot",
];
const ANIMALS: [&str; 10] = [
    "cat",
    "dog",
    "pigeon",
    "butterfly",
    "elephant",
    "horse",
    "deer",
    "snake",
    "fish",
    "rooster",
];

/// IllusionMNIST, IllusionFashionMNIST and IllusionAnimals, each without and
/// then with the `"No illusion"` class.
pub fn builtin_labelsets() -> Vec<LabelSet> {
    let mut out = Vec::new();
    for (name, classes) in [
        ("IllusionMNIST", &MNIST),
        ("IllusionFashionMNIST", &FASHION),
        ("IllusionAnimals", &ANIMALS),
    ] {
        for flag in [false, true] {
            out.push(LabelSet {
                name: name.to_string(),
                classes: strings(classes),
                includes_no_illusion: flag,
            });
        }
    }
    out
}

/// Looks up a built-in set by name (case-insensitive).
pub fn builtin_labelset(name: &str, no_illusion: bool) -> Option<LabelSet> {
    builtin_labelsets()
        .into_iter()
        .find(|s| s.name.eq_ignore_ascii_case(name) && s.includes_no_illusion == no_illusion)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Raw,
    Illusion,
    Filtered,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Raw => "raw",
            Variant::Illusion => "illusion",
            Variant::Filtered => "filtered",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(Variant::Raw),
            "illusion" => Ok(Variant::Illusion),
            "filtered" => Ok(Variant::Filtered),
            other => Err(format!("unknown variant `{other}` (raw|illusion|filtered)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    Classification,
    Char,
}

impl fmt::Display for SampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleKind::Classification => "classification",
            SampleKind::Char => "char",
        })
    }
}

impl std::str::FromStr for SampleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "classification" => Ok(SampleKind::Classification),
            "char" => Ok(SampleKind::Char),
            other => Err(format!("unknown kind `{other}` (classification|char)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// One labeled image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub id: String,
    pub image_path: String,
    pub variant: Variant,
    pub kind: SampleKind,
    pub true_label: String,
    pub split: Split,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum LabelSpec {
    Builtin {
        builtin: String,
        #[serde(default)]
        no_illusion: bool,
    },
    Custom(LabelSet),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestHeader {
    labels: Option<LabelSpec>,
}

/// A validated list of samples bound to an optional label set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub labels: Option<LabelSet>,
    pub records: Vec<SampleRecord>,
}

fn char_label_ok(label: &str) -> bool {
    label == NO_ILLUSION || (3..=5).contains(&label.chars().count())
}

impl Manifest {
    /// Builds a manifest, applying the same validation as [`parse_manifest`].
    pub fn new(labels: Option<LabelSet>, records: Vec<SampleRecord>) -> Result<Self, DatasetError> {
        let mut manifest = Manifest {
            labels,
            records: Vec::with_capacity(records.len()),
        };
        let mut ids = HashSet::new();
        for (i, record) in records.into_iter().enumerate() {
            manifest.admit(record, i + 2, &mut ids)?;
        }
        Ok(manifest)
    }

    fn admit(
        &mut self,
        record: SampleRecord,
        line: usize,
        ids: &mut HashSet<String>,
    ) -> Result<(), DatasetError> {
        let parse = |message: String| DatasetError::Parse { line, message };
        if record.id.is_empty() {
            return Err(parse("empty id".into()));
        }
        if record.image_path.is_empty() || Path::new(&record.image_path).is_absolute() {
            return Err(parse(format!(
                "image_path must be a non-empty relative path, got `{}`",
                record.image_path
            )));
        }
        match record.kind {
            SampleKind::Classification => {
                let labels = self.labels.as_ref().ok_or_else(|| {
                    parse("classification record but the manifest has no label set".into())
                })?;
                if !labels.contains(&record.true_label) {
                    return Err(DatasetError::UnknownLabel {
                        line,
                        label: record.true_label,
                    });
                }
            }
            SampleKind::Char => {
                if !char_label_ok(&record.true_label) {
                    return Err(parse(format!(
                        "character label `{}` must have 3 to 5 characters",
                        record.true_label
                    )));
                }
            }
        }
        if !ids.insert(record.id.clone()) {
            return Err(DatasetError::DuplicateId {
                line,
                id: record.id,
            });
        }
        self.records.push(record);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&SampleRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    /// The common kind of all records, or `None` when empty or mixed.
    pub fn kind(&self) -> Option<SampleKind> {
        let first = self.records.first()?.kind;
        self.records
            .iter()
            .all(|r| r.kind == first)
            .then_some(first)
    }

    /// Serializes to the line format read by [`parse_manifest`].
    pub fn to_jsonl(&self) -> String {
        let header = ManifestHeader {
            labels: self.labels.clone().map(LabelSpec::Custom),
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for record in &self.records {
            out.push_str(&serde_json::to_string(record).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), DatasetError> {
        let path = path.as_ref();
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, self.to_jsonl())?;
        Ok(())
    }
}

/// Parses manifest text. Blank lines are ignored; line numbers in errors are
/// 1-based.
pub fn parse_manifest(text: &str) -> Result<Manifest, DatasetError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (header_line, header_text) = lines.next().ok_or(DatasetError::Parse {
        line: 1,
        message: "empty manifest: expected a header line".into(),
    })?;
    let header: ManifestHeader =
        serde_json::from_str(header_text).map_err(|e| DatasetError::Parse {
            line: header_line,
            message: format!("bad header: {e}"),
        })?;
    let labels = match header.labels {
        None => None,
        Some(LabelSpec::Builtin {
            builtin,
            no_illusion,
        }) => Some(
            builtin_labelset(&builtin, no_illusion).ok_or_else(|| DatasetError::Parse {
                line: header_line,
                message: format!("unknown built-in label set `{builtin}`"),
            })?,
        ),
        Some(LabelSpec::Custom(set)) => {
            set.check().map_err(|e| DatasetError::Parse {
                line: header_line,
                message: e.to_string(),
            })?;
            Some(set)
        }
    };
    let mut manifest = Manifest {
        labels,
        records: Vec::new(),
    };
    let mut ids = HashSet::new();
    for (line, body) in lines {
        let record: SampleRecord = serde_json::from_str(body).map_err(|e| DatasetError::Parse {
            line,
            message: e.to_string(),
        })?;
        manifest.admit(record, line, &mut ids)?;
    }
    Ok(manifest)
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest, DatasetError> {
    parse_manifest(&std::fs::read_to_string(path)?)
}

/// One raw model answer as stored in a predictions file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionRecord {
    pub sample_id: String,
    pub raw_text: String,
}

impl PredictionRecord {
    pub fn to_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("record serializes");
        line.push('\n');
        line
    }

    pub fn write_line(&self, mut out: impl Write) -> std::io::Result<()> {
        out.write_all(self.to_line().as_bytes())
    }
}

pub fn parse_predictions(text: &str) -> Result<Vec<PredictionRecord>, DatasetError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| DatasetError::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Reads a predictions file; a missing file reads as empty.
pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<PredictionRecord>, DatasetError> {
    match std::fs::read_to_string(path) {
        Ok(text) => parse_predictions(&text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(e.into()),
    }
}

/// A model answer after normalization.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Answer {
    /// A class from the label set, or a character string in char mode.
    Label(String),
    /// Char mode only: the model said it sees no illusion.
    NoIllusion,
    NotCovered,
}

impl Answer {
    pub fn is_covered(&self) -> bool {
        matches!(self, Answer::Label(_))
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            Answer::Label(l) => Some(l),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub sample_id: String,
    pub raw_text: String,
    pub normalized: Answer,
}

impl Prediction {
    pub fn is_covered(&self) -> bool {
        self.normalized.is_covered()
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Byte offset of the first occurrence of `needle` in `hay` that is not
/// glued to a letter or digit on either side.
fn find_whole_word(hay: &str, needle: &str) -> Option<usize> {
    if needle.is_empty() {
        return None;
    }
    let mut start = 0;
    while let Some(rel) = hay[start..].find(needle) {
        let pos = start + rel;
        let end = pos + needle.len();
        let before_ok = hay[..pos]
            .chars()
            .next_back()
            .is_none_or(|c| !is_word_char(c));
        let after_ok = hay[end..].chars().next().is_none_or(|c| !is_word_char(c));
        if before_ok && after_ok {
            return Some(pos);
        }
        start = pos + hay[pos..].chars().next().map_or(1, char::len_utf8);
    }
    None
}

/// Maps free text to a class of `labels`.
///
/// Matching is case-insensitive and whole-word. A "no illusion" phrase wins
/// outright when the set has that class; otherwise the longest matching class
/// name wins and equal lengths go to the earliest occurrence.
pub fn normalize_class_answer(raw: &str, labels: &LabelSet) -> Answer {
    let text = raw.to_lowercase();
    if labels.includes_no_illusion()
        && find_whole_word(&text, &NO_ILLUSION.to_lowercase()).is_some()
    {
        return Answer::Label(NO_ILLUSION.to_string());
    }
    let mut best: Option<(usize, usize, &String)> = None;
    for class in labels.concept_classes() {
        let Some(pos) = find_whole_word(&text, &class.to_lowercase()) else {
            continue;
        };
        let len = class.chars().count();
        let better = match best {
            None => true,
            Some((best_len, best_pos, _)) => len > best_len || (len == best_len && pos < best_pos),
        };
        if better {
            best = Some((len, pos, class));
        }
    }
    best.map_or(Answer::NotCovered, |(_, _, class)| {
        Answer::Label(class.clone())
    })
}

fn quoted_span(raw: &str) -> Option<&str> {
    for (open, close) in [('"', '"'), ('\u{201c}', '\u{201d}')] {
        if let Some(start) = raw.find(open) {
            let body = &raw[start + open.len_utf8()..];
            if let Some(end) = body.find(close) {
                return Some(&body[..end]);
            }
        }
    }
    None
}

fn says_no_illusion(text: &str) -> bool {
    text.trim()
        .trim_end_matches('.')
        .trim()
        .eq_ignore_ascii_case(NO_ILLUSION)
}

/// Extracts the character sequence from a reading answer.
///
/// A double-quoted span is returned verbatim. Without quotes, a bare token of
/// 1 to 16 characters is accepted. "No illusion" yields [`Answer::NoIllusion`].
pub fn normalize_char_answer(raw: &str) -> Answer {
    if let Some(span) = quoted_span(raw) {
        if says_no_illusion(span) {
            return Answer::NoIllusion;
        }
        if span.is_empty() {
            return Answer::NotCovered;
        }
        return Answer::Label(span.to_string());
    }
    if says_no_illusion(raw) {
        return Answer::NoIllusion;
    }
    let bare = raw.trim();
    let n = bare.chars().count();
    if (1..=16).contains(&n) && !bare.chars().any(char::is_whitespace) {
        return Answer::Label(bare.to_string());
    }
    Answer::NotCovered
}

/// Normalizes according to the sample kind.
pub fn normalize_answer(raw: &str, kind: SampleKind, labels: Option<&LabelSet>) -> Answer {
    match (kind, labels) {
        (SampleKind::Classification, Some(labels)) => normalize_class_answer(raw, labels),
        (SampleKind::Classification, None) => Answer::NotCovered,
        (SampleKind::Char, _) => normalize_char_answer(raw),
    }
}
