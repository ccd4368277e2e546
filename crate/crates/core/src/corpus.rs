//! Package comment documents, their eight smell labels, CSV I/O, and a
//! seeded synthetic corpus generator.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SmellKind {
    Blob,
    Lm,
    Sak,
    Cc,
    Igs,
    Mim,
    Nlmr,
    Lic,
}

impl SmellKind {
    /// Canonical report order.
    pub const ALL: [SmellKind; 8] = [
        SmellKind::Blob,
        SmellKind::Lm,
        SmellKind::Sak,
        SmellKind::Cc,
        SmellKind::Igs,
        SmellKind::Mim,
        SmellKind::Nlmr,
        SmellKind::Lic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SmellKind::Blob => "BLOB",
            SmellKind::Lm => "LM",
            SmellKind::Sak => "SAK",
            SmellKind::Cc => "CC",
            SmellKind::Igs => "IGS",
            SmellKind::Mim => "MIM",
            SmellKind::Nlmr => "NLMR",
            SmellKind::Lic => "LIC",
        }
    }

    pub fn full_name(self) -> &'static str {
        match self {
            SmellKind::Blob => "Blob Class",
            SmellKind::Lm => "Long Method",
            SmellKind::Sak => "Swiss Army Knife",
            SmellKind::Cc => "Complex Class",
            SmellKind::Igs => "Internal Getter Setter",
            SmellKind::Mim => "Member Ignoring Method",
            SmellKind::Nlmr => "No Low Memory Resolver",
            SmellKind::Lic => "Leaking Internal Class",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Packages carrying the smell in the reference 629-package study.
    pub fn reference_with_count(self) -> usize {
        match self {
            SmellKind::Blob => 169,
            SmellKind::Lm => 404,
            SmellKind::Sak => 474,
            SmellKind::Cc => 399,
            SmellKind::Igs => 365,
            SmellKind::Mim => 364,
            SmellKind::Nlmr => 439,
            SmellKind::Lic => 469,
        }
    }
}

pub const REFERENCE_PACKAGES: usize = 629;

impl fmt::Display for SmellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SmellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SmellKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parameter(format!("unknown smell '{s}'")))
    }
}

/// Lowercases, then splits on every run of non-alphanumeric characters.
pub fn tokenize(raw_text: &str) -> Vec<String> {
    raw_text
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub package_id: String,
    pub raw_text: String,
    pub tokens: Vec<String>,
}

impl Document {
    pub fn new(package_id: impl Into<String>, raw_text: impl Into<String>) -> Self {
        let raw_text = raw_text.into();
        let tokens = tokenize(&raw_text);
        Self {
            package_id: package_id.into(),
            raw_text,
            tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRow {
    pub package_id: String,
    /// Indexed by [`SmellKind::index`].
    pub labels: [bool; 8],
}

impl LabelRow {
    pub fn get(&self, smell: SmellKind) -> bool {
        self.labels[smell.index()]
    }
}

/// Documents and label rows, aligned by position and package id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    documents: Vec<Document>,
    labels: Vec<LabelRow>,
}

impl Corpus {
    /// Validates ids and aligns `labels` to document order.
    pub fn new(documents: Vec<Document>, labels: Vec<LabelRow>) -> Result<Self> {
        let mut seen = HashSet::new();
        for d in &documents {
            if d.package_id.is_empty() {
                return Err(Error::Load {
                    package_id: String::new(),
                    reason: "document with empty package_id".into(),
                });
            }
            if !seen.insert(d.package_id.as_str()) {
                return Err(Error::Load {
                    package_id: d.package_id.clone(),
                    reason: "duplicate package_id in documents".into(),
                });
            }
        }
        let mut by_id: HashMap<String, LabelRow> = HashMap::with_capacity(labels.len());
        for row in labels {
            if row.package_id.is_empty() {
                return Err(Error::Load {
                    package_id: String::new(),
                    reason: "label row with empty package_id".into(),
                });
            }
            if by_id.contains_key(&row.package_id) {
                return Err(Error::Load {
                    package_id: row.package_id,
                    reason: "duplicate package_id in labels".into(),
                });
            }
            by_id.insert(row.package_id.clone(), row);
        }
        let mut aligned = Vec::with_capacity(documents.len());
        for d in &documents {
            match by_id.remove(&d.package_id) {
                Some(row) => aligned.push(row),
                None => {
                    return Err(Error::Alignment(format!(
                        "package '{}' has a document but no label row",
                        d.package_id
                    )))
                }
            }
        }
        if let Some(extra) = by_id.keys().min() {
            return Err(Error::Alignment(format!(
                "package '{extra}' has a label row but no document"
            )));
        }
        Ok(Self {
            documents,
            labels: aligned,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn label_rows(&self) -> &[LabelRow] {
        &self.labels
    }

    pub fn package_ids(&self) -> Vec<String> {
        self.documents.iter().map(|d| d.package_id.clone()).collect()
    }

    /// Target column for one smell, in corpus order.
    pub fn labels_for(&self, smell: SmellKind) -> Vec<bool> {
        self.labels.iter().map(|r| r.get(smell)).collect()
    }

    pub fn class_distribution(&self, smell: SmellKind) -> (usize, usize) {
        class_distribution(self, smell)
    }
}

/// `(count_without, count_with)` for one smell.
pub fn class_distribution(corpus: &Corpus, smell: SmellKind) -> (usize, usize) {
    let with = corpus.labels.iter().filter(|r| r.get(smell)).count();
    (corpus.len() - with, with)
}

const DOC_HEADER: [&str; 2] = ["package_id", "text"];

pub fn load_corpus(doc_path: &Path, label_path: &Path) -> Result<Corpus> {
    let documents = read_documents(doc_path)?;
    let labels = read_labels(label_path)?;
    Corpus::new(documents, labels)
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

pub fn read_documents(path: &Path) -> Result<Vec<Document>> {
    let mut rdr = open_csv(path)?;
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != DOC_HEADER {
        return Err(Error::Schema(format!(
            "{}: expected header 'package_id,text', found '{}'",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut docs = Vec::new();
    for record in rdr.records() {
        let record = record?;
        docs.push(Document::new(&record[0], &record[1]));
    }
    Ok(docs)
}

pub fn read_labels(path: &Path) -> Result<Vec<LabelRow>> {
    let mut rdr = open_csv(path)?;
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("package_id") {
        return Err(Error::Schema(format!(
            "{}: first label column must be 'package_id'",
            path.display()
        )));
    }
    let mut columns = [usize::MAX; 8];
    for smell in SmellKind::ALL {
        columns[smell.index()] = headers
            .iter()
            .position(|h| h == smell.as_str())
            .ok_or_else(|| {
                Error::Schema(format!(
                    "{}: label file is missing column '{}'",
                    path.display(),
                    smell
                ))
            })?;
    }
    let mut rows = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let mut labels = [false; 8];
        for smell in SmellKind::ALL {
            let raw = record.get(columns[smell.index()]).unwrap_or("");
            labels[smell.index()] = match raw.trim() {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Schema(format!(
                        "{}: data row {}: column {} must be 0 or 1, found '{}'",
                        path.display(),
                        line + 1,
                        smell,
                        other
                    )))
                }
            };
        }
        rows.push(LabelRow {
            package_id: record[0].to_owned(),
            labels,
        });
    }
    Ok(rows)
}

/// Writes both CSV files in canonical column order.
pub fn write_corpus(corpus: &Corpus, doc_path: &Path, label_path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(doc_path)?;
    w.write_record(DOC_HEADER)?;
    for d in &corpus.documents {
        w.write_record([d.package_id.as_str(), d.raw_text.as_str()])?;
    }
    w.flush().map_err(|e| Error::io(doc_path, e))?;

    let mut w = csv::Writer::from_path(label_path)?;
    let mut header = vec!["package_id"];
    header.extend(SmellKind::ALL.iter().map(|s| s.as_str()));
    w.write_record(&header)?;
    for row in &corpus.labels {
        let mut rec = vec![row.package_id.as_str()];
        rec.extend(row.labels.iter().map(|&l| if l { "1" } else { "0" }));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(label_path, e))?;
    Ok(())
}

/// Parameters of the synthetic corpus generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_packages: usize,
    /// Fraction of packages carrying each smell, indexed by [`SmellKind::index`].
    pub positive_ratios: [f64; 8],
    pub vocab_size: usize,
    /// Size of each smell's private signal vocabulary.
    pub signal_words: usize,
    /// Probability that a token of a smelly document comes from a signal vocabulary.
    pub signal_strength: f64,
    pub min_doc_len: usize,
    pub max_doc_len: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_packages: REFERENCE_PACKAGES,
            positive_ratios: reference_ratios(),
            vocab_size: 600,
            signal_words: 10,
            signal_strength: 0.5,
            min_doc_len: 40,
            max_doc_len: 100,
        }
    }
}

/// Per-smell positive fractions of the reference study.
pub fn reference_ratios() -> [f64; 8] {
    SmellKind::ALL.map(|s| s.reference_with_count() as f64 / REFERENCE_PACKAGES as f64)
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_packages < 2 {
            return Err(Error::Parameter("n_packages must be at least 2".into()));
        }
        for (smell, r) in SmellKind::ALL.iter().zip(self.positive_ratios) {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::Parameter(format!(
                    "imbalance ratio for {smell} must lie in (0, 1), got {r}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.signal_strength) {
            return Err(Error::Parameter(format!(
                "signal strength must lie in [0, 1], got {}",
                self.signal_strength
            )));
        }
        if self.signal_words == 0 {
            return Err(Error::Parameter("signal_words must be positive".into()));
        }
        if self.vocab_size <= 8 * self.signal_words {
            return Err(Error::Parameter(format!(
                "vocab_size {} leaves no background words after {} signal words per smell",
                self.vocab_size, self.signal_words
            )));
        }
        if self.min_doc_len == 0 || self.min_doc_len > self.max_doc_len {
            return Err(Error::Parameter(
                "document length range must satisfy 1 <= min <= max".into(),
            ));
        }
        Ok(())
    }

    /// Number of positive packages generated for a smell.
    pub fn positive_count(&self, smell: SmellKind) -> usize {
        let n = self.n_packages;
        let raw = (self.positive_ratios[smell.index()] * n as f64).round() as usize;
        raw.clamp(1, n - 1)
    }
}

fn word(index: usize) -> String {
    // letters only, so tokenization leaves it intact
    let mut s = String::from("w");
    let mut i = index;
    loop {
        s.push((b'a' + (i % 26) as u8) as char);
        i /= 26;
        if i == 0 {
            break;
        }
    }
    s
}

/// Generates a corpus whose smelly documents borrow tokens from a per-smell
/// signal vocabulary with probability `signal_strength`.
pub fn generate_synthetic_corpus(spec: &SyntheticSpec, seed: u64) -> Result<Corpus> {
    spec.validate()?;
    let n = spec.n_packages;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut labels = vec![[false; 8]; n];
    let mut order: Vec<usize> = (0..n).collect();
    for smell in SmellKind::ALL {
        order.shuffle(&mut rng);
        for &i in &order[..spec.positive_count(smell)] {
            labels[i][smell.index()] = true;
        }
    }

    let vocab: Vec<String> = (0..spec.vocab_size).map(word).collect();
    let background = &vocab[8 * spec.signal_words..];
    let mut documents = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for (i, row) in labels.iter().enumerate() {
        let present: Vec<usize> = (0..8).filter(|&s| row[s]).collect();
        let len = rng.random_range(spec.min_doc_len..=spec.max_doc_len);
        let mut tokens: Vec<&str> = Vec::with_capacity(len);
        for _ in 0..len {
            let from_signal = !present.is_empty() && rng.random::<f64>() < spec.signal_strength;
            if from_signal {
                let s = present[rng.random_range(0..present.len())];
                let w = rng.random_range(0..spec.signal_words);
                tokens.push(&vocab[s * spec.signal_words + w]);
            } else {
                tokens.push(&background[rng.random_range(0..background.len())]);
            }
        }
        let id = format!("pkg{i:04}");
        documents.push(Document::new(id.clone(), tokens.join(" ")));
        rows.push(LabelRow {
            package_id: id,
            labels: *row,
        });
    }
    Corpus::new(documents, rows)
}
