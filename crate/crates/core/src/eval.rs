//! Stratified k-fold cross-validation, fold metrics and the experiment grid
//! (feature generator × feature set × sampler × kernel × smell).
//!
//! Randomness is derived from one master seed: fold plans depend only on the
//! smell, and sampler draws on the cell identity minus its kernel, so the
//! three kernels of a cell family always see identical training data.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, SmellKind};
use crate::embedding::{featurize, train_embedding, EmbeddingConfig, EmbeddingMode, FeatureMatrix};
use crate::error::{Error, Result};
use crate::kelm::{train_kelm, KernelKind, KernelSpec};
use crate::linalg::Matrix;
use crate::sampling::{resample, LabeledDataset, Provenance, SamplerConfig};
use crate::selection::{significant_features, FeatureSetKind, DEFAULT_ALPHA, DEFAULT_CORR_THRESHOLD};
use crate::stats::{midranks, ranksum_matrix, PValueMatrix};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CvMode {
    /// Selection and sampling are fit inside each training fold.
    #[default]
    Clean,
    /// Selection and sampling run on the full dataset before splitting.
    Leaky,
}

impl CvMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CvMode::Clean => "clean",
            CvMode::Leaky => "leaky",
        }
    }
}

impl fmt::Display for CvMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CvMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "clean" => Ok(CvMode::Clean),
            "leaky" => Ok(CvMode::Leaky),
            other => Err(Error::Parameter(format!("unknown cv mode '{other}' (expected clean or leaky)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    /// Fold index of every row.
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }
}

/// Shuffles each class with `seed` and deals it round-robin over `k` folds.
/// Negatives continue from the fold after the last positive so fold sizes
/// also differ by at most one.
pub fn stratified_kfold(y: &[bool], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Parameter(format!("k must be at least 2, got {k}")));
    }
    let mut pos: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let mut neg: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    for (name, class) in [("positive", &pos), ("negative", &neg)] {
        if class.len() < k {
            return Err(Error::Parameter(format!(
                "{name} class has {} rows, fewer than k = {k}",
                class.len()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut assignments = vec![0; y.len()];
    for (slot, &row) in pos.iter().chain(&neg).enumerate() {
        assignments[row] = slot % k;
    }
    Ok(FoldPlan { k, assignments, seed })
}

/// Rank-based ROC AUC with midranks for ties.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            actual: scores.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Stats("AUC scores must be finite".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Stats("AUC is undefined with a single class".into()));
    }
    let (ranks, _) = midranks(scores);
    let rank_sum: f64 = ranks.iter().zip(labels).filter(|(_, &l)| l).map(|(r, _)| r).sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn from_predictions(predicted: &[bool], actual: &[bool]) -> Result<Self> {
        if predicted.len() != actual.len() {
            return Err(Error::Dimension {
                expected: actual.len(),
                actual: predicted.len(),
            });
        }
        let mut c = Confusion::default();
        for (&p, &a) in predicted.iter().zip(actual) {
            match (p, a) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Percent correct, in [0, 100].
    pub fn accuracy(&self) -> f64 {
        if self.total() == 0 {
            return 0.0;
        }
        100.0 * (self.tp + self.tn) as f64 / self.total() as f64
    }
}

/// F1; zero when there are no true positives.
pub fn f_measure(c: &Confusion) -> f64 {
    if c.tp == 0 {
        return 0.0;
    }
    let tp = c.tp as f64;
    2.0 * tp / (2.0 * tp + c.fp as f64 + c.fn_ as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_rows: usize,
    pub selected_features: usize,
    pub confusion: Confusion,
    pub accuracy: f64,
    pub auc: f64,
    pub f_measure: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub accuracy: f64,
    pub auc: f64,
    pub f_measure: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellConfig {
    pub smell: SmellKind,
    pub feature_gen: EmbeddingMode,
    pub feature_set: FeatureSetKind,
    pub sampling: Provenance,
    pub kernel: KernelKind,
}

impl CellConfig {
    pub fn label(&self) -> String {
        format!(
            "{}/{}/{}/{}/{}",
            self.feature_gen, self.feature_set, self.sampling, self.kernel, self.smell
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentCell {
    #[serde(flatten)]
    pub config: CellConfig,
    pub status: CellStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
    pub fold_results: Vec<FoldResult>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub aggregates: Option<Aggregates>,
    /// Sampler fallbacks and convergence warnings.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl ExperimentCell {
    pub fn is_ok(&self) -> bool {
        self.status == CellStatus::Ok
    }

    pub fn metric(&self, metric: Metric) -> Option<f64> {
        self.aggregates.map(|a| match metric {
            Metric::Accuracy => a.accuracy,
            Metric::Auc => a.auc,
            Metric::FMeasure => a.f_measure,
        })
    }

    fn skipped(config: CellConfig, reason: String, notes: Vec<String>) -> Self {
        Self {
            config,
            status: CellStatus::Skipped,
            reason: Some(reason),
            fold_results: Vec::new(),
            aggregates: None,
            notes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSettings {
    pub k_folds: usize,
    pub cv_mode: CvMode,
    pub reg_c: f64,
    /// RBF width; `None` means 1 / (selected feature count).
    pub gamma: Option<f64>,
    pub degree: u32,
    pub coef0: f64,
    pub alpha: f64,
    pub corr_threshold: f64,
    /// Z-score the selected columns before the kernel machine, with statistics
    /// of the real (not oversampled) training rows.
    pub standardize: bool,
    pub sampler: SamplerConfig,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        Self {
            k_folds: 10,
            cv_mode: CvMode::Clean,
            reg_c: 1.0,
            gamma: None,
            degree: 3,
            coef0: 1.0,
            alpha: DEFAULT_ALPHA,
            corr_threshold: DEFAULT_CORR_THRESHOLD,
            standardize: true,
            sampler: SamplerConfig::default(),
        }
    }
}

impl ExperimentSettings {
    pub fn validate(&self) -> Result<()> {
        if self.k_folds < 2 {
            return Err(Error::Parameter(format!("k_folds must be at least 2, got {}", self.k_folds)));
        }
        if !(self.reg_c > 0.0) {
            return Err(Error::Parameter(format!("reg_c must be positive, got {}", self.reg_c)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Parameter(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.corr_threshold > 0.0 && self.corr_threshold <= 1.0) {
            return Err(Error::Parameter(format!(
                "corr_threshold must lie in (0, 1], got {}",
                self.corr_threshold
            )));
        }
        self.sampler.validate()?;
        self.kernel_spec(KernelKind::Rbfk, 1).validate()
    }

    pub fn kernel_spec(&self, kind: KernelKind, input_dim: usize) -> KernelSpec {
        let mut spec = KernelSpec::with_defaults(kind, input_dim);
        if let Some(g) = self.gamma {
            spec.gamma = g;
        }
        spec.degree = self.degree;
        spec.coef0 = self.coef0;
        spec
    }
}

/// SplitMix64 finalizer folded over `parts`.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    parts.iter().fold(mix(master), |acc, &p| mix(acc ^ mix(p)))
}

const FOLD_STREAM: u64 = 1;
const SAMPLER_STREAM: u64 = 2;
const EMBEDDING_STREAM: u64 = 3;

fn fold_seed(master: u64, smell: SmellKind) -> u64 {
    derive_seed(master, &[FOLD_STREAM, smell.index() as u64])
}

fn sampler_seed(master: u64, cell: &CellConfig, fold: usize) -> u64 {
    let gen = EmbeddingMode::ALL.iter().position(|&m| m == cell.feature_gen).unwrap_or(0);
    let set = FeatureSetKind::ALL.iter().position(|&s| s == cell.feature_set).unwrap_or(0);
    let sampling = Provenance::ALL.iter().position(|&s| s == cell.sampling).unwrap_or(0);
    derive_seed(
        master,
        &[
            SAMPLER_STREAM,
            cell.smell.index() as u64,
            gen as u64,
            set as u64,
            sampling as u64,
            fold as u64,
        ],
    )
}

fn select_columns(
    x: &Matrix,
    y: &[bool],
    kind: FeatureSetKind,
    settings: &ExperimentSettings,
) -> Result<Option<Vec<usize>>> {
    match kind {
        FeatureSetKind::Alm => Ok(Some((0..x.cols()).collect())),
        FeatureSetKind::Sgm => {
            let fs = significant_features(x, y, settings.alpha, settings.corr_threshold)?;
            Ok((!fs.is_empty()).then_some(fs.indices))
        }
    }
}

/// Column means and inverse standard deviations fit on one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    inv_sd: Vec<f64>,
}

impl Standardizer {
    /// Constant columns are centred but not rescaled.
    pub fn fit(x: &Matrix) -> Self {
        let n = x.rows().max(1) as f64;
        let mut mean = vec![0.0; x.cols()];
        for row in x.iter_rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let mut var = vec![0.0; x.cols()];
        for row in x.iter_rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m).powi(2) / n;
            }
        }
        let inv_sd = var.iter().map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }).collect();
        Self { mean, inv_sd }
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for i in 0..out.rows() {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(&self.mean).zip(&self.inv_sd) {
                *v = (*v - m) * s;
            }
        }
        out
    }
}

/// Fits on the real training rows (before oversampling) and rescales the
/// training set in place and the test rows.
fn standardize_fold(real_train: &Matrix, trained: &mut Trained, test: Matrix, enabled: bool) -> Matrix {
    if !enabled {
        return test;
    }
    let scaler = Standardizer::fit(real_train);
    trained.x = scaler.transform(&trained.x);
    scaler.transform(&test)
}

struct Trained {
    x: Matrix,
    y: Vec<bool>,
    notes: Vec<String>,
}

fn apply_sampler(x: Matrix, y: Vec<bool>, cell: &CellConfig, sampler: &SamplerConfig) -> Result<Trained> {
    if cell.sampling == Provenance::Ord {
        return Ok(Trained { x, y, notes: Vec::new() });
    }
    let data = LabeledDataset::new(x, y, Provenance::Ord)?;
    let out = resample(&data, cell.sampling, sampler)?;
    let (x, y) = out.data.into_parts();
    Ok(Trained {
        x,
        y,
        notes: out.warnings,
    })
}

fn evaluate_fold(
    fold: usize,
    train: &Trained,
    test_x: &Matrix,
    test_y: &[bool],
    kernel: KernelKind,
    settings: &ExperimentSettings,
) -> Result<FoldResult> {
    let spec = settings.kernel_spec(kernel, train.x.cols());
    let model = train_kelm(&train.x, &train.y, &spec, settings.reg_c)?;
    let scores = model.predict_scores(test_x)?;
    let predicted: Vec<bool> = scores.iter().map(|&s| s >= 0.0).collect();
    let confusion = Confusion::from_predictions(&predicted, test_y)?;
    Ok(FoldResult {
        fold,
        train_rows: train.x.rows(),
        selected_features: train.x.cols(),
        confusion,
        accuracy: confusion.accuracy(),
        auc: roc_auc(&scores, test_y)?,
        f_measure: f_measure(&confusion),
    })
}

enum CellError {
    Skip(String),
    Fail(Error),
}

impl From<Error> for CellError {
    fn from(e: Error) -> Self {
        CellError::Fail(e)
    }
}

fn run_folds(
    features: &Matrix,
    labels: &[bool],
    cell: &CellConfig,
    settings: &ExperimentSettings,
    master_seed: u64,
    notes: &mut Vec<String>,
) -> std::result::Result<Vec<FoldResult>, CellError> {
    let k = settings.k_folds;
    let mut results = Vec::with_capacity(k);
    match settings.cv_mode {
        CvMode::Clean => {
            let plan = stratified_kfold(labels, k, fold_seed(master_seed, cell.smell))?;
            for fold in 0..k {
                let train_idx = plan.train_indices(fold);
                let test_idx = plan.test_indices(fold);
                let train_x = features.select_rows(&train_idx);
                let train_y: Vec<bool> = train_idx.iter().map(|&i| labels[i]).collect();
                let Some(cols) = select_columns(&train_x, &train_y, cell.feature_set, settings)? else {
                    return Err(CellError::Skip(format!("empty SGM feature set in fold {fold}")));
                };
                let sampler = SamplerConfig {
                    seed: sampler_seed(master_seed, cell, fold),
                    ..settings.sampler.clone()
                };
                let train_x = train_x.select_cols(&cols);
                let mut trained = apply_sampler(train_x.clone(), train_y, cell, &sampler)?;
                notes.extend(trained.notes.iter().map(|n| format!("fold {fold}: {n}")));
                let test_x = standardize_fold(
                    &train_x,
                    &mut trained,
                    features.select_rows(&test_idx).select_cols(&cols),
                    settings.standardize,
                );
                let test_y: Vec<bool> = test_idx.iter().map(|&i| labels[i]).collect();
                results.push(evaluate_fold(fold, &trained, &test_x, &test_y, cell.kernel, settings)?);
            }
        }
        CvMode::Leaky => {
            let Some(cols) = select_columns(features, labels, cell.feature_set, settings)? else {
                return Err(CellError::Skip("empty SGM feature set".into()));
            };
            let sampler = SamplerConfig {
                seed: sampler_seed(master_seed, cell, usize::MAX),
                ..settings.sampler.clone()
            };
            let selected = features.select_cols(&cols);
            let mut full = apply_sampler(selected.clone(), labels.to_vec(), cell, &sampler)?;
            if settings.standardize {
                full.x = Standardizer::fit(&selected).transform(&full.x);
            }
            notes.extend(full.notes.iter().cloned());
            let plan = stratified_kfold(&full.y, k, fold_seed(master_seed, cell.smell))?;
            for fold in 0..k {
                let train_idx = plan.train_indices(fold);
                let test_idx = plan.test_indices(fold);
                let trained = Trained {
                    x: full.x.select_rows(&train_idx),
                    y: train_idx.iter().map(|&i| full.y[i]).collect(),
                    notes: Vec::new(),
                };
                let test_x = full.x.select_rows(&test_idx);
                let test_y: Vec<bool> = test_idx.iter().map(|&i| full.y[i]).collect();
                results.push(evaluate_fold(fold, &trained, &test_x, &test_y, cell.kernel, settings)?);
            }
        }
    }
    Ok(results)
}

/// Cross-validates one cell. Never fails: errors become a skipped cell whose
/// `reason` carries the message.
pub fn run_cell(
    features: &FeatureMatrix,
    labels: &[bool],
    cell: CellConfig,
    settings: &ExperimentSettings,
    master_seed: u64,
) -> ExperimentCell {
    if features.rows() != labels.len() {
        return ExperimentCell::skipped(
            cell,
            format!("{} feature rows but {} labels", features.rows(), labels.len()),
            Vec::new(),
        );
    }
    let mut notes = Vec::new();
    match run_folds(&features.values, labels, &cell, settings, master_seed, &mut notes) {
        Ok(folds) => {
            let n = folds.len() as f64;
            let mean = |f: fn(&FoldResult) -> f64| folds.iter().map(f).sum::<f64>() / n;
            let aggregates = Aggregates {
                accuracy: mean(|r| r.accuracy),
                auc: mean(|r| r.auc),
                f_measure: mean(|r| r.f_measure),
            };
            ExperimentCell {
                config: cell,
                status: CellStatus::Ok,
                reason: None,
                fold_results: folds,
                aggregates: Some(aggregates),
                notes,
            }
        }
        Err(CellError::Skip(reason)) => ExperimentCell::skipped(cell, reason, notes),
        Err(CellError::Fail(e)) => ExperimentCell::skipped(cell, format!("error: {e}"), notes),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub feature_gens: Vec<EmbeddingMode>,
    pub feature_sets: Vec<FeatureSetKind>,
    pub samplings: Vec<Provenance>,
    pub kernels: Vec<KernelKind>,
    pub smells: Vec<SmellKind>,
    /// Template for both embedding modes; `mode` and `seed` are overridden.
    pub embedding: EmbeddingConfig,
    pub settings: ExperimentSettings,
    pub master_seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            feature_gens: EmbeddingMode::ALL.to_vec(),
            feature_sets: FeatureSetKind::ALL.to_vec(),
            samplings: Provenance::ALL.to_vec(),
            kernels: KernelKind::ALL.to_vec(),
            smells: SmellKind::ALL.to_vec(),
            embedding: EmbeddingConfig::default(),
            settings: ExperimentSettings::default(),
            master_seed: 0,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("feature_gens", self.feature_gens.is_empty()),
            ("feature_sets", self.feature_sets.is_empty()),
            ("samplings", self.samplings.is_empty()),
            ("kernels", self.kernels.is_empty()),
            ("smells", self.smells.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::Parameter(format!("grid axis '{name}' is empty")));
        }
        self.embedding.validate()?;
        self.settings.validate()
    }

    /// Cells in canonical order: feature_gen, feature_set, sampling, kernel, smell.
    pub fn cells(&self) -> Vec<CellConfig> {
        let mut out = Vec::new();
        for &feature_gen in &self.feature_gens {
            for &feature_set in &self.feature_sets {
                for &sampling in &self.samplings {
                    for &kernel in &self.kernels {
                        for &smell in &self.smells {
                            out.push(CellConfig {
                                smell,
                                feature_gen,
                                feature_set,
                                sampling,
                                kernel,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Embedding settings actually used for `mode`.
    pub fn embedding_for(&self, mode: EmbeddingMode) -> EmbeddingConfig {
        EmbeddingConfig {
            mode,
            seed: derive_seed(self.master_seed, &[EMBEDDING_STREAM, mode as u64]),
            ..self.embedding.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub master_seed: u64,
    pub settings: ExperimentSettings,
    pub embedding: EmbeddingConfig,
    pub corpus_size: usize,
    pub feature_dim: usize,
    pub cells: Vec<ExperimentCell>,
    pub comparisons: Vec<GroupComparison>,
}

impl ExperimentReport {
    pub fn ok_cells(&self) -> impl Iterator<Item = &ExperimentCell> {
        self.cells.iter().filter(|c| c.is_ok())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Mean of a metric over the ok cells matching `filter`.
    pub fn mean_metric(&self, metric: Metric, filter: impl Fn(&CellConfig) -> bool) -> Option<f64> {
        let vals: Vec<f64> = self
            .ok_cells()
            .filter(|c| filter(&c.config))
            .filter_map(|c| c.metric(metric))
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

/// Trains one embedding per feature generator, then evaluates every cell.
pub fn run_grid(corpus: &Corpus, config: &GridConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut features = Vec::with_capacity(config.feature_gens.len());
    for &mode in &config.feature_gens {
        let model = train_embedding(corpus, &config.embedding_for(mode))?;
        features.push((mode, featurize(corpus, &model)));
    }
    run_grid_on_features(corpus, &features, config)
}

/// Evaluates the grid on precomputed document features, in parallel on the
/// current rayon pool.
pub fn run_grid_on_features(
    corpus: &Corpus,
    features: &[(EmbeddingMode, FeatureMatrix)],
    config: &GridConfig,
) -> Result<ExperimentReport> {
    config.validate()?;
    for &mode in &config.feature_gens {
        match features.iter().find(|(m, _)| *m == mode) {
            None => return Err(Error::Parameter(format!("no features supplied for {mode}"))),
            Some((_, f)) if f.rows() != corpus.len() => {
                return Err(Error::Dimension {
                    expected: corpus.len(),
                    actual: f.rows(),
                })
            }
            Some((_, f)) if f.row_ids != corpus.package_ids() => {
                return Err(Error::Alignment(format!("{mode} feature rows are not in corpus order")))
            }
            Some(_) => {}
        }
    }
    let labels: Vec<Vec<bool>> = SmellKind::ALL.iter().map(|&s| corpus.labels_for(s)).collect();
    let cells: Vec<ExperimentCell> = config
        .cells()
        .into_par_iter()
        .map(|cell| {
            let feats = &features.iter().find(|(m, _)| *m == cell.feature_gen).expect("checked above").1;
            run_cell(
                feats,
                &labels[cell.smell.index()],
                cell,
                &config.settings,
                config.master_seed,
            )
        })
        .collect();
    let feature_dim = features.first().map(|(_, f)| f.cols()).unwrap_or(0);
    let mut report = ExperimentReport {
        master_seed: config.master_seed,
        settings: config.settings.clone(),
        embedding: config.embedding.clone(),
        corpus_size: corpus.len(),
        feature_dim,
        cells,
        comparisons: Vec::new(),
    };
    report.comparisons = all_comparisons(&report);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub p25: f64,
    pub p75: f64,
}

/// Inclusive-method percentile of sorted data, `q` in [0, 1].
fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(values: &[f64]) -> Result<SummaryStats> {
    if values.is_empty() {
        return Err(Error::Stats("cannot summarize an empty list".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Stats("cannot summarize non-finite values".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = (sorted.iter().sum::<f64>() / sorted.len() as f64).clamp(sorted[0], sorted[sorted.len() - 1]);
    Ok(SummaryStats {
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        mean,
        median: percentile_sorted(&sorted, 0.5),
        p25: percentile_sorted(&sorted, 0.25),
        p75: percentile_sorted(&sorted, 0.75),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    Kernel,
    Sampling,
    FeatureGen,
    FeatureSet,
}

impl Grouping {
    pub const ALL: [Grouping; 4] = [
        Grouping::Kernel,
        Grouping::Sampling,
        Grouping::FeatureGen,
        Grouping::FeatureSet,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Grouping::Kernel => "kernel",
            Grouping::Sampling => "sampling",
            Grouping::FeatureGen => "feature_gen",
            Grouping::FeatureSet => "feature_set",
        }
    }

    /// Every possible group value, in canonical order.
    pub fn values(self) -> Vec<&'static str> {
        match self {
            Grouping::Kernel => KernelKind::ALL.iter().map(|k| k.as_str()).collect(),
            Grouping::Sampling => Provenance::ALL.iter().map(|p| p.as_str()).collect(),
            Grouping::FeatureGen => EmbeddingMode::ALL.iter().map(|m| m.as_str()).collect(),
            Grouping::FeatureSet => FeatureSetKind::ALL.iter().map(|f| f.as_str()).collect(),
        }
    }

    pub fn key(self, cell: &CellConfig) -> &'static str {
        match self {
            Grouping::Kernel => cell.kernel.as_str(),
            Grouping::Sampling => cell.sampling.as_str(),
            Grouping::FeatureGen => cell.feature_gen.as_str(),
            Grouping::FeatureSet => cell.feature_set.as_str(),
        }
    }
}

impl fmt::Display for Grouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Grouping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "kernel" | "kernels" => Ok(Grouping::Kernel),
            "sampling" | "sampler" | "samplers" => Ok(Grouping::Sampling),
            "feature_gen" | "feature_gens" => Ok(Grouping::FeatureGen),
            "feature_set" | "feature_sets" => Ok(Grouping::FeatureSet),
            other => Err(Error::Parameter(format!(
                "unknown grouping '{other}' (expected kernel, sampling, feature_gen or feature_set)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    Auc,
    FMeasure,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Accuracy, Metric::Auc, Metric::FMeasure];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Auc => "auc",
            Metric::FMeasure => "f_measure",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "accuracy" | "acc" => Ok(Metric::Accuracy),
            "auc" => Ok(Metric::Auc),
            "f_measure" | "f" | "f1" | "fmeasure" => Ok(Metric::FMeasure),
            other => Err(Error::Parameter(format!(
                "unknown metric '{other}' (expected accuracy, auc or f_measure)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: String,
    /// Cells in the group, ok or not.
    pub cells: usize,
    /// Ok cells contributing values.
    pub values: usize,
    pub stats: SummaryStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub grouping: Grouping,
    pub metric: Metric,
    pub groups: Vec<GroupSummary>,
    pub ranksum: PValueMatrix,
}

/// Pools each ok cell's mean `metric` by group value; groups without any ok
/// cell are left out.
pub fn compare_groups(report: &ExperimentReport, grouping: Grouping, metric: Metric) -> Result<GroupComparison> {
    let mut pooled: Vec<(String, usize, Vec<f64>)> = Vec::new();
    for name in grouping.values() {
        let members: Vec<&ExperimentCell> = report
            .cells
            .iter()
            .filter(|c| grouping.key(&c.config) == name)
            .collect();
        let vals: Vec<f64> = members.iter().filter_map(|c| c.metric(metric)).collect();
        if !vals.is_empty() {
            pooled.push((name.to_owned(), members.len(), vals));
        }
    }
    if pooled.is_empty() {
        return Err(Error::Stats(format!("no completed cells to group by {grouping}")));
    }
    let mut groups = Vec::with_capacity(pooled.len());
    for (name, cells, vals) in &pooled {
        groups.push(GroupSummary {
            group: name.clone(),
            cells: *cells,
            values: vals.len(),
            stats: summarize(vals)?,
        });
    }
    let named: Vec<(String, Vec<f64>)> = pooled.into_iter().map(|(n, _, v)| (n, v)).collect();
    Ok(GroupComparison {
        grouping,
        metric,
        groups,
        ranksum: ranksum_matrix(&named)?,
    })
}

/// Every grouping × metric comparison that has data.
pub fn all_comparisons(report: &ExperimentReport) -> Vec<GroupComparison> {
    let mut out = Vec::new();
    for g in Grouping::ALL {
        for m in Metric::ALL {
            if let Ok(c) = compare_groups(report, g, m) {
                out.push(c);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kfold_exact_divisibility() {
        let y: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
        let plan = stratified_kfold(&y, 10, 3).unwrap();
        for f in 0..10 {
            let test = plan.test_indices(f);
            assert_eq!(test.len(), 2);
            assert_eq!(test.iter().filter(|&&i| y[i]).count(), 1);
        }
    }

    #[test]
    fn kfold_errors() {
        let y: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
        assert!(stratified_kfold(&y, 1, 0).is_err());
        let few: Vec<bool> = (0..20).map(|i| i < 3).collect();
        let err = stratified_kfold(&few, 10, 0).unwrap_err().to_string();
        assert!(err.contains("positive"), "{err}");
    }

    #[test]
    fn kfold_reference_imbalance() {
        let y: Vec<bool> = (0..629).map(|i| i < 399).collect();
        let plan = stratified_kfold(&y, 10, 11).unwrap();
        for f in 0..10 {
            let pos = plan.test_indices(f).iter().filter(|&&i| y[i]).count();
            assert!(pos == 39 || pos == 40);
        }
    }

    #[test]
    fn auc_anchors() {
        let labels = [false, false, true, true];
        assert_eq!(roc_auc(&[0.1, 0.2, 0.3, 0.4], &labels).unwrap(), 1.0);
        assert_eq!(roc_auc(&[0.5; 4], &labels).unwrap(), 0.5);
        assert_eq!(roc_auc(&[0.4, 0.3, 0.2, 0.1], &labels).unwrap(), 0.0);
        assert!(roc_auc(&[0.1, 0.2], &[true, true]).is_err());
    }

    #[test]
    fn f_measure_anchors() {
        let c = |tp, fp, fn_| Confusion { tp, fp, tn: 0, fn_ };
        assert_eq!(f_measure(&c(10, 0, 0)), 1.0);
        assert_eq!(f_measure(&c(0, 3, 4)), 0.0);
        assert_eq!(f_measure(&c(5, 5, 5)), 0.5);
    }

    #[test]
    fn confusion_counts() {
        let c = Confusion::from_predictions(&[true, true, false, false], &[true, false, false, true]).unwrap();
        assert_eq!((c.tp, c.fp, c.tn, c.fn_), (1, 1, 1, 1));
        assert_eq!(c.accuracy(), 50.0);
    }

    #[test]
    fn summarize_anchors() {
        let s = summarize(&[5.0, 1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!((s.min, s.p25, s.median, s.p75, s.max, s.mean), (1.0, 2.0, 3.0, 4.0, 5.0, 3.0));
        let c = summarize(&[7.5; 6]).unwrap();
        assert!([c.min, c.p25, c.median, c.p75, c.max, c.mean].iter().all(|&v| v == 7.5));
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn grid_cardinality() {
        let cfg = GridConfig::default();
        assert_eq!(cfg.cells().len(), 384);
        let kernels = cfg.cells().iter().filter(|c| c.kernel == KernelKind::Rbfk).count();
        assert_eq!(kernels, 128);
    }

    #[test]
    fn seeds_differ_by_part() {
        assert_ne!(derive_seed(1, &[1, 2]), derive_seed(1, &[2, 1]));
        assert_ne!(derive_seed(1, &[0]), derive_seed(2, &[0]));
        assert_eq!(derive_seed(9, &[4, 4]), derive_seed(9, &[4, 4]));
    }

    #[test]
    fn parse_names() {
        assert_eq!("feature-gen".parse::<Grouping>().unwrap(), Grouping::FeatureGen);
        assert_eq!("F1".parse::<Metric>().unwrap(), Metric::FMeasure);
        assert_eq!("LEAKY".parse::<CvMode>().unwrap(), CvMode::Leaky);
        assert!("bogus".parse::<Grouping>().is_err());
    }
}
