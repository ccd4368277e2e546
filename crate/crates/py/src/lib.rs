//! Python bindings: corpus generation and I/O, embeddings, resampling,
//! feature selection, the kernel ELM, metrics and the experiment grid.

use std::path::PathBuf;
use std::str::FromStr;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use smellforge::corpus::{generate_synthetic_corpus, load_corpus, tokenize as tokenize_text, write_corpus};
use smellforge::embedding::{featurize, train_embedding};
use smellforge::eval::{compare_groups, roc_auc as auc, run_grid};
use smellforge::kelm::train_kelm;
use smellforge::sampling::resample as resample_data;
use smellforge::selection::significant_features;
use smellforge::stats::mann_whitney_u;
use smellforge::{
    Corpus as CoreCorpus, EmbeddingConfig, EmbeddingMode, EmbeddingModel, ExperimentReport, GridConfig, Grouping,
    KernelKind, KernelSpec, LabeledDataset, Matrix, Metric, Provenance, SamplerConfig, SmellKind, SyntheticSpec,
    TrainedKelm,
};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: FromStr>(s: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(value_err)
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    Matrix::from_rows(&rows).map_err(value_err)
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.iter_rows().map(<[f64]>::to_vec).collect()
}

/// Lowercased alphanumeric tokens of a comment text.
#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    tokenize_text(text)
}

/// Labelled comment corpus.
#[pyclass(frozen)]
struct Corpus {
    inner: CoreCorpus,
}

#[pymethods]
impl Corpus {
    /// Generates a synthetic corpus with the reference imbalance ratios.
    #[staticmethod]
    #[pyo3(signature = (seed, n_packages=629, signal_strength=0.5, vocab_size=None, min_doc_len=None, max_doc_len=None))]
    fn synthetic(
        seed: u64,
        n_packages: usize,
        signal_strength: f64,
        vocab_size: Option<usize>,
        min_doc_len: Option<usize>,
        max_doc_len: Option<usize>,
    ) -> PyResult<Self> {
        let mut spec = SyntheticSpec {
            n_packages,
            signal_strength,
            ..Default::default()
        };
        if let Some(v) = vocab_size {
            spec.vocab_size = v;
        }
        if let Some(v) = min_doc_len {
            spec.min_doc_len = v;
        }
        if let Some(v) = max_doc_len {
            spec.max_doc_len = v;
        }
        let inner = generate_synthetic_corpus(&spec, seed).map_err(value_err)?;
        Ok(Self { inner })
    }

    /// Loads documents and labels CSV files.
    #[staticmethod]
    fn load(documents: PathBuf, labels: PathBuf) -> PyResult<Self> {
        let inner = load_corpus(&documents, &labels).map_err(value_err)?;
        Ok(Self { inner })
    }

    fn save(&self, documents: PathBuf, labels: PathBuf) -> PyResult<()> {
        write_corpus(&self.inner, &documents, &labels).map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn package_ids(&self) -> Vec<String> {
        self.inner.package_ids()
    }

    fn texts(&self) -> Vec<String> {
        self.inner.documents().iter().map(|d| d.raw_text.clone()).collect()
    }

    /// Binary labels of one smell, e.g. "BLOB".
    fn labels(&self, smell: &str) -> PyResult<Vec<bool>> {
        Ok(self.inner.labels_for(parse::<SmellKind>(smell)?))
    }

    /// `(without, with)` counts for one smell.
    fn class_distribution(&self, smell: &str) -> PyResult<(usize, usize)> {
        Ok(self.inner.class_distribution(parse::<SmellKind>(smell)?))
    }
}

/// Trained word embedding.
#[pyclass(frozen)]
struct Embedding {
    inner: EmbeddingModel,
}

#[pymethods]
impl Embedding {
    #[staticmethod]
    #[pyo3(signature = (corpus, mode="cbow", dim=100, epochs=5, seed=0))]
    fn train(py: Python<'_>, corpus: &Corpus, mode: &str, dim: usize, epochs: usize, seed: u64) -> PyResult<Self> {
        let cfg = EmbeddingConfig {
            mode: parse::<EmbeddingMode>(mode)?,
            dim,
            epochs,
            seed,
            ..Default::default()
        };
        let inner = py.detach(|| train_embedding(&corpus.inner, &cfg)).map_err(value_err)?;
        Ok(Self { inner })
    }

    fn words(&self) -> Vec<String> {
        self.inner.words().to_vec()
    }

    fn vector(&self, word: &str) -> Option<Vec<f64>> {
        self.inner.vector(word).map(<[f64]>::to_vec)
    }

    fn epoch_losses(&self) -> Vec<f64> {
        self.inner.epoch_losses().to_vec()
    }

    /// One averaged document vector per package, in corpus order.
    fn featurize(&self, corpus: &Corpus) -> Vec<Vec<f64>> {
        rows(&featurize(&corpus.inner, &self.inner).values)
    }
}

/// Kernel extreme learning machine.
#[pyclass(frozen)]
struct Kelm {
    inner: TrainedKelm,
}

#[pymethods]
impl Kelm {
    #[staticmethod]
    #[pyo3(signature = (x, y, kernel="rbfk", reg_c=1.0, gamma=None, degree=3, coef0=1.0))]
    fn train(
        x: Vec<Vec<f64>>,
        y: Vec<bool>,
        kernel: &str,
        reg_c: f64,
        gamma: Option<f64>,
        degree: u32,
        coef0: f64,
    ) -> PyResult<Self> {
        let x = matrix(x)?;
        let mut spec = KernelSpec::with_defaults(parse::<KernelKind>(kernel)?, x.cols());
        if let Some(g) = gamma {
            spec.gamma = g;
        }
        spec.degree = degree;
        spec.coef0 = coef0;
        let inner = train_kelm(&x, &y, &spec, reg_c).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn alpha(&self) -> Vec<f64> {
        self.inner.alpha.clone()
    }

    fn scores(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        self.inner.predict_scores(&matrix(x)?).map_err(value_err)
    }

    fn predict(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<bool>> {
        Ok(self.scores(x)?.into_iter().map(|s| s >= 0.0).collect())
    }
}

/// Rebalances a binary dataset; returns `(x, y)` with the originals first.
#[pyfunction]
#[pyo3(signature = (x, y, method="smote", seed=0, k_neighbors=5, m_neighbors=10))]
fn resample(
    x: Vec<Vec<f64>>,
    y: Vec<bool>,
    method: &str,
    seed: u64,
    k_neighbors: usize,
    m_neighbors: usize,
) -> PyResult<(Vec<Vec<f64>>, Vec<bool>)> {
    let data = LabeledDataset::new(matrix(x)?, y, Provenance::Ord).map_err(value_err)?;
    let cfg = SamplerConfig {
        seed,
        k_neighbors,
        m_neighbors,
        ..Default::default()
    };
    let out = resample_data(&data, parse::<Provenance>(method)?, &cfg).map_err(value_err)?;
    let (m, labels) = out.data.into_parts();
    Ok((rows(&m), labels))
}

/// Column indices kept by the significance filter and decorrelation.
#[pyfunction]
#[pyo3(signature = (x, y, alpha=0.05, corr_threshold=0.7))]
fn select_features(x: Vec<Vec<f64>>, y: Vec<bool>, alpha: f64, corr_threshold: f64) -> PyResult<Vec<usize>> {
    let set = significant_features(&matrix(x)?, &y, alpha, corr_threshold).map_err(value_err)?;
    Ok(set.indices)
}

#[pyfunction]
fn roc_auc(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<f64> {
    auc(&scores, &labels).map_err(value_err)
}

/// Two-sided rank-sum test; returns `(U of the first sample, p)`.
#[pyfunction]
fn rank_sum(a: Vec<f64>, b: Vec<f64>) -> PyResult<(f64, f64)> {
    let r = mann_whitney_u(&a, &b).map_err(value_err)?;
    Ok((r.u_statistic, r.p_value))
}

/// Results of an experiment grid.
#[pyclass(frozen)]
struct Report {
    inner: ExperimentReport,
}

#[pymethods]
impl Report {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = ExperimentReport::from_json(text).map_err(value_err)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.inner.cells.len()
    }

    #[getter]
    fn ok_cells(&self) -> usize {
        self.inner.ok_cells().count()
    }

    /// Mean of a metric over ok cells, optionally restricted to one value of
    /// a grouping, e.g. `mean("auc", "kernel", "RBFK")`.
    #[pyo3(signature = (metric, grouping=None, group=None))]
    fn mean(&self, metric: &str, grouping: Option<&str>, group: Option<&str>) -> PyResult<Option<f64>> {
        let metric = parse::<Metric>(metric)?;
        let filter = match (grouping, group) {
            (Some(g), Some(v)) => Some((parse::<Grouping>(g)?, v.to_uppercase())),
            (None, None) => None,
            _ => return Err(PyValueError::new_err("grouping and group must be given together")),
        };
        Ok(self.inner.mean_metric(metric, |c| match &filter {
            Some((g, v)) => g.key(c) == v,
            None => true,
        }))
    }

    /// One `(group, [min, max, mean, median, p25, p75])` entry per group.
    fn summary(&self, grouping: &str, metric: &str) -> PyResult<Vec<(String, [f64; 6])>> {
        let c = compare_groups(&self.inner, parse(grouping)?, parse(metric)?).map_err(value_err)?;
        Ok(c.groups
            .into_iter()
            .map(|g| {
                let s = g.stats;
                (g.group, [s.min, s.max, s.mean, s.median, s.p25, s.p75])
            })
            .collect())
    }
}

/// Runs the experiment grid. `config_json` uses the same layout as the
/// `grid` section of the CLI configuration file.
#[pyfunction]
#[pyo3(signature = (corpus, seed, config_json=None))]
fn run_experiment(py: Python<'_>, corpus: &Corpus, seed: u64, config_json: Option<&str>) -> PyResult<Report> {
    let mut cfg: GridConfig = match config_json {
        Some(text) => serde_json::from_str(text).map_err(value_err)?,
        None => GridConfig::default(),
    };
    cfg.master_seed = seed;
    let inner = py.detach(|| run_grid(&corpus.inner, &cfg)).map_err(value_err)?;
    Ok(Report { inner })
}

#[pymodule]
#[pyo3(name = "smellforge")]
fn smellforge_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Corpus>()?;
    m.add_class::<Embedding>()?;
    m.add_class::<Kelm>()?;
    m.add_class::<Report>()?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(resample, m)?)?;
    m.add_function(wrap_pyfunction!(select_features, m)?)?;
    m.add_function(wrap_pyfunction!(roc_auc, m)?)?;
    m.add_function(wrap_pyfunction!(rank_sum, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
