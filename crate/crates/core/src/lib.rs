//! Code-smell detection for Android packages from word-embedding document
//! features: corpus loading and synthesis, CBOW / skip-gram embeddings,
//! feature selection, SMOTE-family oversampling, kernel extreme learning
//! machines, rank-based statistics and the cross-validated experiment grid.

pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod kelm;
pub mod linalg;
pub mod report;
pub mod sampling;
pub mod selection;
pub mod stats;

pub use corpus::{Corpus, Document, LabelRow, SmellKind, SyntheticSpec};
pub use embedding::{EmbeddingConfig, EmbeddingMode, EmbeddingModel, FeatureMatrix};
pub use error::{Error, Result};
pub use eval::{
    CellConfig, CvMode, ExperimentCell, ExperimentReport, ExperimentSettings, GridConfig, Grouping, Metric,
    SummaryStats,
};
pub use kelm::{KernelKind, KernelSpec, TrainedKelm};
pub use linalg::Matrix;
pub use sampling::{LabeledDataset, Provenance, SamplerConfig, SamplingOutcome};
pub use selection::{FeatureSet, FeatureSetKind};
