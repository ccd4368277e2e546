//! Word2vec (CBOW and skip-gram) with negative sampling, and the per-package
//! feature vectors built from it.
//!
//! Training is single-threaded and fully determined by the corpus and the
//! config seed: documents are visited in corpus order, tokens left to right,
//! and every random draw (initialization, skip-gram window shrink, negative
//! samples) comes from generators seeded by the config. Context windows never
//! cross document boundaries.
//!
//! Model files are plain text:
//!
//! ```text
//! SMFG-EMB-1
//! mode=CBOW dim=100 vocab=523 window=5 negatives=5 epochs=15 initial_lr=0.025 min_count=1 seed=7
//! losses=<per-epoch mean loss, space separated>
//! <word> <count> <input vector ...>      (vocab lines)
//! <word> <output vector ...>             (vocab lines)
//! ```

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

pub const EMBEDDING_MAGIC: &str = "SMFG-EMB-1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EmbeddingMode {
    #[serde(rename = "CBOW")]
    Cbow,
    #[serde(rename = "SKG")]
    SkipGram,
}

impl EmbeddingMode {
    pub const ALL: [EmbeddingMode; 2] = [EmbeddingMode::Cbow, EmbeddingMode::SkipGram];

    pub fn as_str(self) -> &'static str {
        match self {
            EmbeddingMode::Cbow => "CBOW",
            EmbeddingMode::SkipGram => "SKG",
        }
    }
}

impl fmt::Display for EmbeddingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmbeddingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cbow" => Ok(EmbeddingMode::Cbow),
            "skg" | "skm" | "skipgram" | "skip-gram" | "sg" => Ok(EmbeddingMode::SkipGram),
            other => Err(Error::Parameter(format!("unknown embedding mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingConfig {
    pub mode: EmbeddingMode,
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    pub min_count: usize,
    pub seed: u64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            mode: EmbeddingMode::Cbow,
            dim: 100,
            window: 5,
            negatives: 5,
            epochs: 15,
            initial_lr: 0.025,
            min_count: 1,
            seed: 0,
        }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.window == 0 || self.epochs == 0 || self.min_count == 0 {
            return Err(Error::Parameter(
                "dim, window, epochs and min_count must all be at least 1".into(),
            ));
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return Err(Error::Parameter(format!(
                "initial_lr must be positive, got {}",
                self.initial_lr
            )));
        }
        Ok(())
    }
}

/// One negative-sampling training example. `inputs` holds the single center
/// word for skip-gram or the context words for CBOW (averaged).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NsExample {
    pub inputs: Vec<usize>,
    pub target: usize,
    pub negatives: Vec<usize>,
}

/// Dense gradient of one example's loss, merged per touched row.
#[derive(Debug, Clone, PartialEq)]
pub struct NsGradient {
    pub input_rows: Vec<(usize, Vec<f64>)>,
    pub output_rows: Vec<(usize, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    input_vectors: Matrix,
    output_vectors: Matrix,
    config: EmbeddingConfig,
    epoch_losses: Vec<f64>,
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// −ln σ(x), stable for large |x|.
#[inline]
fn neg_log_sigmoid(x: f64) -> f64 {
    (-x).max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Scratch space for one forward/backward pass.
struct Pass {
    hidden: Vec<f64>,
    grad_hidden: Vec<f64>,
    /// (output row, dL/d(score)) per scored pair; the output-row gradient is coeff·hidden.
    coeffs: Vec<(usize, f64)>,
}

impl Pass {
    fn new(dim: usize) -> Self {
        Self {
            hidden: vec![0.0; dim],
            grad_hidden: vec![0.0; dim],
            coeffs: Vec::new(),
        }
    }

    fn run(&mut self, input: &Matrix, output: &Matrix, inputs: &[usize], target: usize, negatives: &[usize]) -> f64 {
        self.hidden.iter_mut().for_each(|v| *v = 0.0);
        self.grad_hidden.iter_mut().for_each(|v| *v = 0.0);
        self.coeffs.clear();
        let scale = 1.0 / inputs.len() as f64;
        for &i in inputs {
            for (h, v) in self.hidden.iter_mut().zip(input.row(i)) {
                *h += v * scale;
            }
        }
        let mut loss = 0.0;
        let pairs = std::iter::once((target, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0)));
        for (row, label) in pairs {
            let u = output.row(row);
            let score = dot(&self.hidden, u);
            loss += if label > 0.0 {
                neg_log_sigmoid(score)
            } else {
                neg_log_sigmoid(-score)
            };
            let g = sigmoid(score) - label;
            for (gh, uv) in self.grad_hidden.iter_mut().zip(u) {
                *gh += g * uv;
            }
            self.coeffs.push((row, g));
        }
        loss
    }
}

impl EmbeddingModel {
    /// Fresh model over a fixed vocabulary: inputs uniform in ±0.5/dim, outputs zero.
    pub fn initialize(words: Vec<String>, counts: Vec<u64>, config: EmbeddingConfig) -> Result<Self> {
        config.validate()?;
        if words.is_empty() {
            return Err(Error::Training("empty effective vocabulary".into()));
        }
        if words.len() != counts.len() {
            return Err(Error::Dimension {
                expected: words.len(),
                actual: counts.len(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let dim = config.dim;
        let data = (0..words.len() * dim)
            .map(|_| (rng.random::<f64>() - 0.5) / dim as f64)
            .collect();
        let input_vectors = Matrix::from_vec(words.len(), dim, data)?;
        let output_vectors = Matrix::zeros(words.len(), dim);
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Ok(Self {
            words,
            counts,
            index,
            input_vectors,
            output_vectors,
            config,
            epoch_losses: Vec::new(),
        })
    }

    pub fn config(&self) -> &EmbeddingConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn vocab_len(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word_index(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.counts[idx]
    }

    pub fn input_vectors(&self) -> &Matrix {
        &self.input_vectors
    }

    pub fn output_vectors(&self) -> &Matrix {
        &self.output_vectors
    }

    pub fn input_vectors_mut(&mut self) -> &mut Matrix {
        &mut self.input_vectors
    }

    pub fn output_vectors_mut(&mut self) -> &mut Matrix {
        &mut self.output_vectors
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.word_index(token).map(|i| self.input_vectors.row(i))
    }

    /// Mean negative-sampling loss of each training epoch.
    pub fn epoch_losses(&self) -> &[f64] {
        &self.epoch_losses
    }

    fn check_example(&self, ex: &NsExample) -> Result<()> {
        let v = self.vocab_len();
        if ex.inputs.is_empty() {
            return Err(Error::Parameter("example needs at least one input word".into()));
        }
        if let Some(&bad) = ex
            .inputs
            .iter()
            .chain(&ex.negatives)
            .chain(std::iter::once(&ex.target))
            .find(|&&i| i >= v)
        {
            return Err(Error::Parameter(format!("word index {bad} outside vocabulary of {v}")));
        }
        Ok(())
    }

    /// Negative-sampling cross-entropy of one example.
    pub fn example_loss(&self, ex: &NsExample) -> Result<f64> {
        self.check_example(ex)?;
        let mut pass = Pass::new(self.dim());
        Ok(pass.run(&self.input_vectors, &self.output_vectors, &ex.inputs, ex.target, &ex.negatives))
    }

    /// Analytic gradient of [`Self::example_loss`] with respect to every touched row.
    pub fn example_gradient(&self, ex: &NsExample) -> Result<NsGradient> {
        self.check_example(ex)?;
        let dim = self.dim();
        let mut pass = Pass::new(dim);
        pass.run(&self.input_vectors, &self.output_vectors, &ex.inputs, ex.target, &ex.negatives);

        fn add(rows: &mut Vec<(usize, Vec<f64>)>, row: usize, dim: usize, delta: impl Iterator<Item = f64>) {
            let pos = rows.iter().position(|(r, _)| *r == row).unwrap_or_else(|| {
                rows.push((row, vec![0.0; dim]));
                rows.len() - 1
            });
            for (acc, d) in rows[pos].1.iter_mut().zip(delta) {
                *acc += d;
            }
        }

        let scale = 1.0 / ex.inputs.len() as f64;
        let mut input_rows = Vec::new();
        for &i in &ex.inputs {
            add(&mut input_rows, i, dim, pass.grad_hidden.iter().map(|g| g * scale));
        }
        let mut output_rows = Vec::new();
        for &(row, g) in &pass.coeffs {
            add(&mut output_rows, row, dim, pass.hidden.iter().map(|h| g * h));
        }
        Ok(NsGradient {
            input_rows,
            output_rows,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let c = &self.config;
        let io = |e| Error::io(path, e);
        writeln!(w, "{EMBEDDING_MAGIC}").map_err(io)?;
        writeln!(
            w,
            "mode={} dim={} vocab={} window={} negatives={} epochs={} initial_lr={} min_count={} seed={}",
            c.mode,
            c.dim,
            self.vocab_len(),
            c.window,
            c.negatives,
            c.epochs,
            c.initial_lr,
            c.min_count,
            c.seed
        )
        .map_err(io)?;
        let losses: Vec<String> = self.epoch_losses.iter().map(|l| l.to_string()).collect();
        writeln!(w, "losses={}", losses.join(" ")).map_err(io)?;
        for (i, word) in self.words.iter().enumerate() {
            write!(w, "{} {}", word, self.counts[i]).map_err(io)?;
            for v in self.input_vectors.row(i) {
                write!(w, " {v}").map_err(io)?;
            }
            writeln!(w).map_err(io)?;
        }
        for (i, word) in self.words.iter().enumerate() {
            write!(w, "{word}").map_err(io)?;
            for v in self.output_vectors.row(i) {
                write!(w, " {v}").map_err(io)?;
            }
            writeln!(w).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Format(format!("unexpected end of file, expected {what}")))?
                .map_err(|e| Error::io(path, e))
        };
        if next("magic")? != EMBEDDING_MAGIC {
            return Err(Error::Format(format!("missing {EMBEDDING_MAGIC} header")));
        }
        let header = next("header")?;
        let fields: HashMap<&str, &str> = header
            .split_whitespace()
            .filter_map(|kv| kv.split_once('='))
            .collect();
        fn field<T: FromStr>(fields: &HashMap<&str, &str>, key: &str) -> Result<T> {
            fields
                .get(key)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Format(format!("missing or invalid header field '{key}'")))
        }
        let config = EmbeddingConfig {
            mode: fields
                .get("mode")
                .ok_or_else(|| Error::Format("missing header field 'mode'".into()))?
                .parse()?,
            dim: field(&fields, "dim")?,
            window: field(&fields, "window")?,
            negatives: field(&fields, "negatives")?,
            epochs: field(&fields, "epochs")?,
            initial_lr: field(&fields, "initial_lr")?,
            min_count: field(&fields, "min_count")?,
            seed: field(&fields, "seed")?,
        };
        let vocab: usize = field(&fields, "vocab")?;
        let losses_line = next("losses")?;
        let epoch_losses = losses_line
            .strip_prefix("losses=")
            .ok_or_else(|| Error::Format("missing losses line".into()))?
            .split_whitespace()
            .map(|v| v.parse::<f64>().map_err(|_| Error::Format(format!("bad loss '{v}'"))))
            .collect::<Result<Vec<_>>>()?;
        let parse_floats = |parts: std::str::SplitWhitespace<'_>| -> Result<Vec<f64>> {
            parts
                .map(|v| v.parse::<f64>().map_err(|_| Error::Format(format!("bad number '{v}'"))))
                .collect()
        };
        let dim = config.dim;
        let mut words = Vec::with_capacity(vocab);
        let mut counts = Vec::with_capacity(vocab);
        let mut input = Vec::with_capacity(vocab * dim);
        for _ in 0..vocab {
            let line = next("input vector")?;
            let mut parts = line.split_whitespace();
            words.push(parts.next().unwrap_or_default().to_owned());
            counts.push(
                parts
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| Error::Format("bad word count".into()))?,
            );
            let v = parse_floats(parts)?;
            if v.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    actual: v.len(),
                });
            }
            input.extend(v);
        }
        let mut output = Vec::with_capacity(vocab * dim);
        for i in 0..vocab {
            let line = next("output vector")?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(words[i].as_str()) {
                return Err(Error::Format(format!("output row {i} does not match word '{}'", words[i])));
            }
            let v = parse_floats(parts)?;
            if v.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    actual: v.len(),
                });
            }
            output.extend(v);
        }
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Ok(Self {
            input_vectors: Matrix::from_vec(vocab, dim, input)?,
            output_vectors: Matrix::from_vec(vocab, dim, output)?,
            words,
            counts,
            index,
            config,
            epoch_losses,
        })
    }
}

/// Vocabulary of tokens with frequency ≥ `min_count`, sorted by descending
/// count then lexicographically.
pub fn build_vocab(corpus: &Corpus, min_count: usize) -> (Vec<String>, Vec<u64>) {
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for doc in corpus.documents() {
        for t in &doc.tokens {
            *freq.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut entries: Vec<(&str, u64)> = freq
        .into_iter()
        .filter(|&(_, c)| c >= min_count as u64)
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    entries.into_iter().map(|(w, c)| (w.to_owned(), c)).unzip()
}

/// Cumulative unigram^(3/4) distribution for negative draws.
struct NoiseTable {
    cumulative: Vec<f64>,
}

impl NoiseTable {
    fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        Self { cumulative }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().unwrap_or(&0.0);
        let r = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= r)
            .min(self.cumulative.len() - 1)
    }
}

pub fn train_embedding(corpus: &Corpus, config: &EmbeddingConfig) -> Result<EmbeddingModel> {
    config.validate()?;
    let (words, counts) = build_vocab(corpus, config.min_count);
    let mut model = EmbeddingModel::initialize(words, counts, config.clone())?;
    let docs: Vec<Vec<usize>> = corpus
        .documents()
        .iter()
        .map(|d| d.tokens.iter().filter_map(|t| model.word_index(t)).collect())
        .collect();
    let token_total: usize = docs.iter().map(Vec::len).sum();
    if token_total == 0 {
        return Err(Error::Training("no in-vocabulary tokens to train on".into()));
    }

    let noise = NoiseTable::new(&model.counts);
    // separate stream from initialization, still fixed by the seed
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let dim = config.dim;
    let window = config.window;
    let total_steps = (config.epochs * token_total) as f64;
    let min_lr = config.initial_lr / 100.0;
    let mut pass = Pass::new(dim);
    let mut context: Vec<usize> = Vec::with_capacity(2 * window);
    let mut negatives: Vec<usize> = Vec::with_capacity(config.negatives);
    let mut step = 0usize;
    let mut losses = Vec::with_capacity(config.epochs);

    for _epoch in 0..config.epochs {
        let mut loss_sum = 0.0;
        let mut examples = 0usize;
        for doc in &docs {
            for pos in 0..doc.len() {
                let progress = step as f64 / total_steps;
                let lr = config.initial_lr - (config.initial_lr - min_lr) * progress;
                step += 1;
                let center = doc[pos];
                match config.mode {
                    EmbeddingMode::Cbow => {
                        // every word in the window weighs the same
                        context.clear();
                        let lo = pos.saturating_sub(window);
                        let hi = (pos + window).min(doc.len() - 1);
                        context.extend((lo..=hi).filter(|&c| c != pos).map(|c| doc[c]));
                        if context.is_empty() {
                            continue;
                        }
                        draw_negatives(&noise, &mut rng, center, config.negatives, &mut negatives);
                        loss_sum += sgd_step(&mut model, &mut pass, &context, center, &negatives, lr);
                        examples += 1;
                    }
                    EmbeddingMode::SkipGram => {
                        // shrunken window: nearer words are visited more often
                        let reach = rng.random_range(1..=window);
                        let lo = pos.saturating_sub(reach);
                        let hi = (pos + reach).min(doc.len() - 1);
                        for c in lo..=hi {
                            if c == pos {
                                continue;
                            }
                            let target = doc[c];
                            draw_negatives(&noise, &mut rng, target, config.negatives, &mut negatives);
                            loss_sum += sgd_step(&mut model, &mut pass, &[center], target, &negatives, lr);
                            examples += 1;
                        }
                    }
                }
            }
        }
        losses.push(if examples > 0 {
            loss_sum / examples as f64
        } else {
            0.0
        });
    }
    model.epoch_losses = losses;
    if !model.input_vectors.is_finite() || !model.output_vectors.is_finite() {
        return Err(Error::Training("embedding diverged to non-finite values".into()));
    }
    Ok(model)
}

fn draw_negatives(noise: &NoiseTable, rng: &mut impl Rng, target: usize, k: usize, out: &mut Vec<usize>) {
    out.clear();
    for _ in 0..k {
        let n = noise.sample(rng);
        if n != target {
            out.push(n);
        }
    }
}

fn sgd_step(
    model: &mut EmbeddingModel,
    pass: &mut Pass,
    inputs: &[usize],
    target: usize,
    negatives: &[usize],
    lr: f64,
) -> f64 {
    let loss = pass.run(&model.input_vectors, &model.output_vectors, inputs, target, negatives);
    for &(row, g) in &pass.coeffs {
        let step = lr * g;
        for (u, h) in model.output_vectors.row_mut(row).iter_mut().zip(&pass.hidden) {
            *u -= step * h;
        }
    }
    let step = lr / inputs.len() as f64;
    for &i in inputs {
        for (v, g) in model.input_vectors.row_mut(i).iter_mut().zip(&pass.grad_hidden) {
            *v -= step * g;
        }
    }
    loss
}

/// Mean input vector of the in-vocabulary tokens; zero if none are known.
pub fn doc_vector<S: AsRef<str>>(model: &EmbeddingModel, tokens: &[S]) -> Vec<f64> {
    let mut acc = vec![0.0; model.dim()];
    let mut n = 0usize;
    for t in tokens {
        if let Some(v) = model.vector(t.as_ref()) {
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x;
            }
            n += 1;
        }
    }
    if n > 0 {
        let inv = 1.0 / n as f64;
        acc.iter_mut().for_each(|a| *a *= inv);
    }
    acc
}

/// Package feature vectors in corpus order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub row_ids: Vec<String>,
    pub values: Matrix,
}

impl FeatureMatrix {
    pub fn new(row_ids: Vec<String>, values: Matrix) -> Result<Self> {
        if row_ids.len() != values.rows() {
            return Err(Error::Dimension {
                expected: values.rows(),
                actual: row_ids.len(),
            });
        }
        Ok(Self { row_ids, values })
    }

    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn cols(&self) -> usize {
        self.values.cols()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["package_id".to_owned()];
        header.extend((0..self.cols()).map(|j| format!("f{j}")));
        w.write_record(&header)?;
        for (id, row) in self.row_ids.iter().zip(self.values.iter_rows()) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::Reader::from_reader(file);
        let headers = rdr.headers()?.clone();
        if headers.get(0) != Some("package_id") {
            return Err(Error::Schema("feature CSV must start with 'package_id'".into()));
        }
        let cols = headers.len() - 1;
        let mut ids = Vec::new();
        let mut data = Vec::new();
        for record in rdr.records() {
            let record = record?;
            ids.push(record[0].to_owned());
            for v in record.iter().skip(1) {
                data.push(
                    v.parse::<f64>()
                        .map_err(|_| Error::Schema(format!("bad feature value '{v}'")))?,
                );
            }
        }
        let rows = ids.len();
        Self::new(ids, Matrix::from_vec(rows, cols, data)?)
    }
}

pub fn featurize(corpus: &Corpus, model: &EmbeddingModel) -> FeatureMatrix {
    let dim = model.dim();
    let mut data = Vec::with_capacity(corpus.len() * dim);
    for doc in corpus.documents() {
        data.extend(doc_vector(model, &doc.tokens));
    }
    FeatureMatrix {
        row_ids: corpus.package_ids(),
        values: Matrix::from_vec(corpus.len(), dim, data).expect("row length equals dim"),
    }
}
