//! ALM (every column) and SGM (rank-sum significant, then decorrelated)
//! feature sets.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::stats::{mann_whitney_u, pearson_corr, point_biserial};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_CORR_THRESHOLD: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FeatureSetKind {
    Alm,
    Sgm,
}

impl FeatureSetKind {
    pub const ALL: [FeatureSetKind; 2] = [FeatureSetKind::Alm, FeatureSetKind::Sgm];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSetKind::Alm => "ALM",
            FeatureSetKind::Sgm => "SGM",
        }
    }
}

impl fmt::Display for FeatureSetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureSetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "alm" | "all" => Ok(FeatureSetKind::Alm),
            "sgm" | "significant" => Ok(FeatureSetKind::Sgm),
            other => Err(Error::Parameter(format!("unknown feature set '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub kind: FeatureSetKind,
    /// Sorted column indices.
    pub indices: Vec<usize>,
    /// `(index, p)` for every selected column; empty for ALM.
    pub p_values: Vec<(usize, f64)>,
    pub alpha: f64,
    pub corr_threshold: Option<f64>,
}

impl FeatureSet {
    pub fn all(dim: usize) -> Self {
        Self {
            kind: FeatureSetKind::Alm,
            indices: (0..dim).collect(),
            p_values: Vec::new(),
            alpha: DEFAULT_ALPHA,
            corr_threshold: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn p_value(&self, index: usize) -> Option<f64> {
        self.p_values.iter().find(|(i, _)| *i == index).map(|(_, p)| *p)
    }

    /// `index,p_value` rows plus a JSON summary next to it.
    pub fn write(&self, csv_path: &Path, json_path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(csv_path)?;
        w.write_record(["index", "p_value"])?;
        for &i in &self.indices {
            let p = self.p_value(i).map(|p| p.to_string()).unwrap_or_default();
            w.write_record([i.to_string(), p])?;
        }
        w.flush().map_err(|e| Error::io(csv_path, e))?;
        let summary = serde_json::json!({
            "kind": self.kind,
            "alpha": self.alpha,
            "threshold": self.corr_threshold,
            "selected": self.indices.len(),
        });
        std::fs::write(json_path, serde_json::to_string_pretty(&summary)?)
            .map_err(|e| Error::io(json_path, e))
    }
}

fn split_by_label(column: &[f64], labels: &[bool]) -> (Vec<f64>, Vec<f64>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (&v, &l) in column.iter().zip(labels) {
        if l {
            pos.push(v);
        } else {
            neg.push(v);
        }
    }
    (pos, neg)
}

/// Two-sided rank-sum p-value of one feature between smelly and clean rows.
pub fn feature_significance(column: &[f64], labels: &[bool]) -> Result<f64> {
    if column.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            actual: column.len(),
        });
    }
    let (pos, neg) = split_by_label(column, labels);
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Stats("significance needs both classes present".into()));
    }
    Ok(mann_whitney_u(&pos, &neg)?.p_value)
}

/// Columns whose p-value is strictly below `alpha`.
pub fn select_significant(x: &Matrix, y: &[bool], alpha: f64) -> Result<FeatureSet> {
    let mut indices = Vec::new();
    let mut p_values = Vec::new();
    for j in 0..x.cols() {
        let p = feature_significance(&x.column(j), y)?;
        if p < alpha {
            indices.push(j);
            p_values.push((j, p));
        }
    }
    Ok(FeatureSet {
        kind: FeatureSetKind::Sgm,
        indices,
        p_values,
        alpha,
        corr_threshold: None,
    })
}

/// Undefined correlations (a constant column) count as zero.
fn abs_corr_or_zero(r: Result<f64>) -> f64 {
    r.map(f64::abs).unwrap_or(0.0)
}

/// Greedy pruning: visit candidates by descending |point-biserial r| with the
/// label (lower index first on ties) and keep one only if its |Pearson r|
/// with every kept column is below `corr_threshold`.
pub fn decorrelate(x: &Matrix, y: &[bool], candidate: &FeatureSet, corr_threshold: f64) -> Result<FeatureSet> {
    let columns: Vec<(usize, Vec<f64>)> = candidate.indices.iter().map(|&j| (j, x.column(j))).collect();
    let mut relevance: Vec<(usize, f64)> = columns
        .iter()
        .enumerate()
        .map(|(k, (_, col))| (k, abs_corr_or_zero(point_biserial(col, y))))
        .collect();
    relevance.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| columns[a.0].0.cmp(&columns[b.0].0))
    });

    let mut kept: Vec<usize> = Vec::new();
    for (k, _) in relevance {
        let col = &columns[k].1;
        let ok = kept
            .iter()
            .all(|&m| abs_corr_or_zero(pearson_corr(col, &columns[m].1)) < corr_threshold);
        if ok {
            kept.push(k);
        }
    }
    let mut indices: Vec<usize> = kept.iter().map(|&k| columns[k].0).collect();
    indices.sort_unstable();
    let p_values = indices
        .iter()
        .filter_map(|&i| candidate.p_value(i).map(|p| (i, p)))
        .collect();
    Ok(FeatureSet {
        kind: FeatureSetKind::Sgm,
        indices,
        p_values,
        alpha: candidate.alpha,
        corr_threshold: Some(corr_threshold),
    })
}

/// Full SGM pipeline: significance filter then decorrelation.
pub fn significant_features(x: &Matrix, y: &[bool], alpha: f64, corr_threshold: f64) -> Result<FeatureSet> {
    let stage1 = select_significant(x, y, alpha)?;
    if stage1.is_empty() {
        return Ok(FeatureSet {
            corr_threshold: Some(corr_threshold),
            ..stage1
        });
    }
    decorrelate(x, y, &stage1, corr_threshold)
}
