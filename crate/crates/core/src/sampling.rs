//! SMOTE, Borderline-SMOTE (variant 1) and SVM-SMOTE oversampling.
//!
//! All three samplers append synthetic minority rows after the untouched
//! original rows until both classes have the majority count. Every synthetic
//! row is logged with its seed row, the neighbor it moved toward (or away
//! from), the step δ ∈ [0, 1) and the branch taken, so its geometry can be
//! re-checked after the fact.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, squared_distance, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Provenance {
    Ord,
    Smote,
    Bsmote,
    Svmsmote,
}

impl Provenance {
    pub const ALL: [Provenance; 4] = [
        Provenance::Ord,
        Provenance::Smote,
        Provenance::Bsmote,
        Provenance::Svmsmote,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Ord => "ORD",
            Provenance::Smote => "SMOTE",
            Provenance::Bsmote => "BSMOTE",
            Provenance::Svmsmote => "SVMSMOTE",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "ord" | "original" | "none" => Ok(Provenance::Ord),
            "smote" => Ok(Provenance::Smote),
            "bsmote" | "borderline" | "borderlinesmote" => Ok(Provenance::Bsmote),
            "svmsmote" | "svm" => Ok(Provenance::Svmsmote),
            other => Err(Error::Parameter(format!("unknown sampler '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    x: Matrix,
    y: Vec<bool>,
    provenance: Provenance,
}

impl LabeledDataset {
    pub fn new(x: Matrix, y: Vec<bool>, provenance: Provenance) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::Dimension {
                expected: x.rows(),
                actual: y.len(),
            });
        }
        if x.rows() < 2 {
            return Err(Error::Parameter("a labeled dataset needs at least two rows".into()));
        }
        if y.iter().all(|&l| l) || y.iter().all(|&l| !l) {
            return Err(Error::Parameter("a labeled dataset needs both classes".into()));
        }
        if !x.is_finite() {
            return Err(Error::Parameter("dataset contains non-finite values".into()));
        }
        Ok(Self { x, y, provenance })
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[bool] {
        &self.y
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// `(negatives, positives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.y.iter().filter(|&&l| l).count();
        (self.y.len() - pos, pos)
    }

    /// Label of the smaller class; `None` when balanced.
    pub fn minority_label(&self) -> Option<bool> {
        let (neg, pos) = self.class_counts();
        match pos.cmp(&neg) {
            std::cmp::Ordering::Less => Some(true),
            std::cmp::Ordering::Greater => Some(false),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn into_parts(self) -> (Matrix, Vec<bool>) {
        (self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub k_neighbors: usize,
    pub m_neighbors: usize,
    pub svm_c: f64,
    pub svm_max_iter: usize,
    /// Measure neighbor distances on z-scored columns.
    pub standardize: bool,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            k_neighbors: 5,
            m_neighbors: 10,
            svm_c: 1.0,
            svm_max_iter: 200,
            standardize: false,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors == 0 || self.m_neighbors == 0 {
            return Err(Error::Parameter("k_neighbors and m_neighbors must be at least 1".into()));
        }
        if !(self.svm_c > 0.0) {
            return Err(Error::Parameter(format!("svm_c must be positive, got {}", self.svm_c)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Interpolate,
    Extrapolate,
}

/// One synthetic row: `seed + δ·(neighbor − seed)` when interpolating,
/// `seed + δ·(seed − neighbor)` when extrapolating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRecord {
    pub seed_index: usize,
    pub neighbor_index: usize,
    pub delta: f64,
    pub branch: Branch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingOutcome {
    pub data: LabeledDataset,
    /// One record per appended row, in row order.
    pub log: Vec<SyntheticRecord>,
    /// Rows that were allowed to act as seeds.
    pub seed_pool: Vec<usize>,
    /// Set when a degenerate input forced the plain SMOTE path.
    pub fallback: bool,
    pub warnings: Vec<String>,
}

impl SamplingOutcome {
    pub fn write_log(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["seed_index", "neighbor_index", "delta", "branch"])?;
        for r in &self.log {
            let branch = match r.branch {
                Branch::Interpolate => "interpolate",
                Branch::Extrapolate => "extrapolate",
            };
            w.write_record([
                r.seed_index.to_string(),
                r.neighbor_index.to_string(),
                r.delta.to_string(),
                branch.to_owned(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn standardized(x: &Matrix) -> Matrix {
    let n = x.rows() as f64;
    let mut out = x.clone();
    for j in 0..x.cols() {
        let col = x.column(j);
        let mean = col.iter().sum::<f64>() / n;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        let scale = if sd > 0.0 { 1.0 / sd } else { 1.0 };
        for i in 0..x.rows() {
            out.set(i, j, (x.get(i, j) - mean) * scale);
        }
    }
    out
}

/// The `k` rows of `candidates` nearest to row `query` (itself excluded),
/// ordered by distance then row index.
pub fn nearest_neighbors(space: &Matrix, query: usize, candidates: &[usize], k: usize) -> Vec<usize> {
    let q = space.row(query);
    let mut d: Vec<(f64, usize)> = candidates
        .iter()
        .filter(|&&c| c != query)
        .map(|&c| (squared_distance(q, space.row(c)), c))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.truncate(k);
    d.into_iter().map(|(_, c)| c).collect()
}

struct Prepared<'a> {
    data: &'a LabeledDataset,
    space: Matrix,
    minority_label: bool,
    minority: Vec<usize>,
    all: Vec<usize>,
    need: usize,
}

enum Prep<'a> {
    Balanced,
    Ready(Prepared<'a>),
}

fn prepare<'a>(data: &'a LabeledDataset, cfg: &SamplerConfig) -> Result<Prep<'a>> {
    cfg.validate()?;
    let Some(minority_label) = data.minority_label() else {
        return Ok(Prep::Balanced);
    };
    let minority: Vec<usize> = (0..data.len()).filter(|&i| data.y[i] == minority_label).collect();
    if minority.len() < 2 {
        return Err(Error::Sampling(format!(
            "minority class has {} row(s); at least 2 are needed",
            minority.len()
        )));
    }
    let (neg, pos) = data.class_counts();
    let space = if cfg.standardize {
        standardized(&data.x)
    } else {
        data.x.clone()
    };
    Ok(Prep::Ready(Prepared {
        data,
        space,
        minority_label,
        need: neg.max(pos) - neg.min(pos),
        minority,
        all: (0..data.len()).collect(),
    }))
}

fn unchanged(data: &LabeledDataset, provenance: Provenance) -> SamplingOutcome {
    SamplingOutcome {
        data: LabeledDataset {
            provenance,
            ..data.clone()
        },
        log: Vec::new(),
        seed_pool: Vec::new(),
        fallback: false,
        warnings: Vec::new(),
    }
}

impl Prepared<'_> {
    fn k_eff(&self, cfg: &SamplerConfig) -> usize {
        cfg.k_neighbors.min(self.minority.len() - 1)
    }

    fn m_eff(&self, cfg: &SamplerConfig) -> usize {
        cfg.m_neighbors.min(self.data.len() - 1)
    }

    /// Majority rows among the `m` nearest rows of the whole dataset.
    fn majority_neighbors(&self, i: usize, m: usize) -> usize {
        nearest_neighbors(&self.space, i, &self.all, m)
            .into_iter()
            .filter(|&j| self.data.y[j] != self.minority_label)
            .count()
    }

    /// Draws `need` synthetic rows from `pool`, choosing the branch per seed.
    fn generate(
        &self,
        cfg: &SamplerConfig,
        pool: &[usize],
        branch_of: impl Fn(usize) -> Branch,
        provenance: Provenance,
    ) -> Result<(LabeledDataset, Vec<SyntheticRecord>)> {
        let k = self.k_eff(cfg);
        let mut neighbor_cache: Vec<Option<Vec<usize>>> = vec![None; self.data.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut x = self.data.x.clone();
        let mut y = self.data.y.clone();
        let mut log = Vec::with_capacity(self.need);
        let mut point = vec![0.0; x.cols()];
        for _ in 0..self.need {
            let seed = pool[rng.random_range(0..pool.len())];
            let neighbors = neighbor_cache[seed]
                .get_or_insert_with(|| nearest_neighbors(&self.space, seed, &self.minority, k));
            let nn = neighbors[rng.random_range(0..neighbors.len())];
            let delta: f64 = rng.random();
            let branch = branch_of(seed);
            let (xs, xn) = (self.data.x.row(seed), self.data.x.row(nn));
            for ((p, s), t) in point.iter_mut().zip(xs).zip(xn) {
                *p = match branch {
                    Branch::Interpolate => s + delta * (t - s),
                    Branch::Extrapolate => s + delta * (s - t),
                };
            }
            x.push_row(&point)?;
            y.push(self.minority_label);
            log.push(SyntheticRecord {
                seed_index: seed,
                neighbor_index: nn,
                delta,
                branch,
            });
        }
        Ok((LabeledDataset { x, y, provenance }, log))
    }
}

fn smote_with(prepared: &Prepared<'_>, cfg: &SamplerConfig, provenance: Provenance) -> Result<SamplingOutcome> {
    let (data, log) = prepared.generate(cfg, &prepared.minority, |_| Branch::Interpolate, provenance)?;
    Ok(SamplingOutcome {
        data,
        log,
        seed_pool: prepared.minority.clone(),
        fallback: false,
        warnings: Vec::new(),
    })
}

/// Interpolates between random minority rows and one of their k nearest
/// minority neighbors until the classes balance.
pub fn smote(data: &LabeledDataset, cfg: &SamplerConfig) -> Result<SamplingOutcome> {
    match prepare(data, cfg)? {
        Prep::Balanced => Ok(unchanged(data, Provenance::Smote)),
        Prep::Ready(p) => smote_with(&p, cfg, Provenance::Smote),
    }
}

/// Minority rows classified by the share of majority rows among their
/// m nearest neighbors.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BorderlineSets {
    pub danger: Vec<usize>,
    pub safe: Vec<usize>,
    pub noise: Vec<usize>,
}

fn classify_borderline(p: &Prepared<'_>, cfg: &SamplerConfig) -> BorderlineSets {
    let m = p.m_eff(cfg);
    let mut sets = BorderlineSets::default();
    for &i in &p.minority {
        let majority = p.majority_neighbors(i, m);
        if majority == m {
            sets.noise.push(i);
        } else if 2 * majority >= m {
            sets.danger.push(i);
        } else {
            sets.safe.push(i);
        }
    }
    sets
}

/// DANGER / SAFE / NOISE partition of the minority rows, as used by
/// [`borderline_smote`].
pub fn borderline_sets(data: &LabeledDataset, cfg: &SamplerConfig) -> Result<BorderlineSets> {
    match prepare(data, cfg)? {
        Prep::Balanced => Ok(BorderlineSets::default()),
        Prep::Ready(p) => Ok(classify_borderline(&p, cfg)),
    }
}

/// SMOTE restricted to DANGER seeds. Falls back to plain SMOTE, with a
/// warning, when no minority row is in danger.
pub fn borderline_smote(data: &LabeledDataset, cfg: &SamplerConfig) -> Result<SamplingOutcome> {
    let p = match prepare(data, cfg)? {
        Prep::Balanced => return Ok(unchanged(data, Provenance::Bsmote)),
        Prep::Ready(p) => p,
    };
    let sets = classify_borderline(&p, cfg);
    if sets.danger.is_empty() {
        let mut out = smote_with(&p, cfg, Provenance::Bsmote)?;
        out.fallback = true;
        out.warnings.push(format!(
            "borderline-smote: empty DANGER set ({} safe, {} noise); used plain SMOTE",
            sets.safe.len(),
            sets.noise.len()
        ));
        return Ok(out);
    }
    let (data, log) = p.generate(cfg, &sets.danger, |_| Branch::Interpolate, Provenance::Bsmote)?;
    Ok(SamplingOutcome {
        data,
        log,
        seed_pool: sets.danger,
        fallback: false,
        warnings: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Rows with dual coefficient above 1e-8.
    pub support_indices: Vec<usize>,
    pub converged: bool,
    pub sweeps: usize,
}

impl LinearSvmModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.decision(x) >= 0.0
    }
}

const SVM_TOL: f64 = 1e-3;
const SVM_STABLE_PASSES: usize = 5;
const SUPPORT_EPS: f64 = 1e-8;

fn train_svm_on(x: &Matrix, y: &[bool], c: f64, max_iter: usize, seed: u64) -> Result<LinearSvmModel> {
    let n = x.rows();
    let d = x.cols();
    let t: Vec<f64> = y.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let sq: Vec<f64> = x.iter_rows().map(|r| dot(r, r)).collect();
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stable = 0;
    let mut sweeps = 0;
    while stable < SVM_STABLE_PASSES && sweeps < max_iter {
        let mut changed = 0;
        for i in 0..n {
            let ei = dot(&w, x.row(i)) + b - t[i];
            let violates = (t[i] * ei < -SVM_TOL && alpha[i] < c) || (t[i] * ei > SVM_TOL && alpha[i] > 0.0);
            if !violates {
                continue;
            }
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let ej = dot(&w, x.row(j)) + b - t[j];
            let (ai_old, aj_old) = (alpha[i], alpha[j]);
            let (lo, hi) = if t[i] != t[j] {
                ((aj_old - ai_old).max(0.0), c.min(c + aj_old - ai_old))
            } else {
                ((ai_old + aj_old - c).max(0.0), c.min(ai_old + aj_old))
            };
            if lo >= hi {
                continue;
            }
            let kij = dot(x.row(i), x.row(j));
            let eta = 2.0 * kij - sq[i] - sq[j];
            if eta >= 0.0 {
                continue;
            }
            let aj = (aj_old - t[j] * (ei - ej) / eta).clamp(lo, hi);
            if (aj - aj_old).abs() < 1e-5 {
                continue;
            }
            let ai = ai_old + t[i] * t[j] * (aj_old - aj);
            let (di, dj) = (t[i] * (ai - ai_old), t[j] * (aj - aj_old));
            let b1 = b - ei - di * sq[i] - dj * kij;
            let b2 = b - ej - di * kij - dj * sq[j];
            b = if ai > 0.0 && ai < c {
                b1
            } else if aj > 0.0 && aj < c {
                b2
            } else {
                (b1 + b2) / 2.0
            };
            for ((wk, xi), xj) in w.iter_mut().zip(x.row(i)).zip(x.row(j)) {
                *wk += di * xi + dj * xj;
            }
            alpha[i] = ai;
            alpha[j] = aj;
            changed += 1;
        }
        sweeps += 1;
        stable = if changed == 0 { stable + 1 } else { 0 };
    }
    if w.iter().any(|v| !v.is_finite()) || !b.is_finite() {
        return Err(Error::Training("linear SVM produced non-finite parameters".into()));
    }
    Ok(LinearSvmModel {
        weights: w,
        bias: b,
        support_indices: (0..n).filter(|&i| alpha[i] > SUPPORT_EPS).collect(),
        converged: stable >= SVM_STABLE_PASSES,
        sweeps,
    })
}

/// Soft-margin linear SVM trained by simplified SMO (random second index).
/// Hitting `max_iter` sweeps returns the last iterate with `converged = false`.
pub fn train_linear_svm(data: &LabeledDataset, c: f64, max_iter: usize, seed: u64) -> Result<LinearSvmModel> {
    if !(c > 0.0) {
        return Err(Error::Parameter(format!("SVM C must be positive, got {c}")));
    }
    train_svm_on(&data.x, &data.y, c, max_iter, seed)
}

/// Seeds are the minority support vectors of a linear SVM. A seed whose
/// m-neighborhood is less than half majority extrapolates away from its
/// minority neighbor; otherwise it interpolates toward it.
pub fn svm_smote(data: &LabeledDataset, cfg: &SamplerConfig) -> Result<SamplingOutcome> {
    let p = match prepare(data, cfg)? {
        Prep::Balanced => return Ok(unchanged(data, Provenance::Svmsmote)),
        Prep::Ready(p) => p,
    };
    let svm = train_svm_on(&p.space, &data.y, cfg.svm_c, cfg.svm_max_iter, cfg.seed)?;
    let seeds: Vec<usize> = svm
        .support_indices
        .iter()
        .copied()
        .filter(|&i| data.y[i] == p.minority_label)
        .collect();
    let mut warnings = Vec::new();
    if !svm.converged {
        warnings.push(format!("svm-smote: SVM stopped after {} sweeps without converging", svm.sweeps));
    }
    if seeds.is_empty() {
        let mut out = smote_with(&p, cfg, Provenance::Svmsmote)?;
        out.fallback = true;
        warnings.push("svm-smote: no minority support vectors; used plain SMOTE".into());
        out.warnings = warnings;
        return Ok(out);
    }
    let m = p.m_eff(cfg);
    let mut branches = vec![Branch::Interpolate; data.len()];
    for &s in &seeds {
        if 2 * p.majority_neighbors(s, m) < m {
            branches[s] = Branch::Extrapolate;
        }
    }
    let (out, log) = p.generate(cfg, &seeds, |s| branches[s], Provenance::Svmsmote)?;
    Ok(SamplingOutcome {
        data: out,
        log,
        seed_pool: seeds,
        fallback: false,
        warnings,
    })
}

/// Applies the sampler named by `provenance`; `Ord` returns the input as is.
pub fn resample(data: &LabeledDataset, provenance: Provenance, cfg: &SamplerConfig) -> Result<SamplingOutcome> {
    match provenance {
        Provenance::Ord => Ok(unchanged(data, Provenance::Ord)),
        Provenance::Smote => smote(data, cfg),
        Provenance::Bsmote => borderline_smote(data, cfg),
        Provenance::Svmsmote => svm_smote(data, cfg),
    }
}
