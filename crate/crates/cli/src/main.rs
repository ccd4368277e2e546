//! `smellforge` command-line front end.
//!
//! Exit codes: 0 success, 1 internal failure, 2 usage or configuration error.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use smellforge::corpus::{generate_synthetic_corpus, load_corpus, write_corpus, SyntheticSpec};
use smellforge::embedding::{featurize, train_embedding};
use smellforge::eval::{compare_groups, run_grid, ExperimentReport, GroupComparison};
use smellforge::report::{matrix_markdown, stats_table_markdown, write_comparison, write_report_outputs};
use smellforge::{
    Corpus, CvMode, EmbeddingMode, FeatureSetKind, Grouping, KernelKind, Metric, Provenance, SmellKind,
};

use crate::config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "smellforge", version, about = "Code-smell detection experiments on comment embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic corpus (documents.csv, labels.csv)
    Synth(SynthArgs),
    /// Train CBOW and/or skip-gram embeddings and write document features
    Featurize(FeaturizeArgs),
    /// Run the cross-validated experiment grid and write the report
    Experiment(ExperimentArgs),
    /// Re-derive a grouping table and p-value matrix from a report
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON run configuration; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (required, here, in the config, or via SMELLFORGE_SEED)
    #[arg(long, env = "SMELLFORGE_SEED")]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct CorpusArgs {
    /// Documents CSV (package_id,text)
    #[arg(long, requires = "labels")]
    docs: Option<PathBuf>,
    /// Labels CSV (package_id plus one 0/1 column per smell)
    #[arg(long, requires = "docs")]
    labels: Option<PathBuf>,
    /// Synthetic corpus size
    #[arg(long)]
    n: Option<usize>,
    /// Synthetic signal strength in [0, 1]
    #[arg(long)]
    signal: Option<f64>,
    /// Eight comma-separated positive ratios in (0, 1), canonical smell order
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    ratios: Option<Vec<f64>>,
    /// Synthetic vocabulary size
    #[arg(long)]
    vocab: Option<usize>,
    /// Synthetic document length range, as MIN,MAX
    #[arg(long, value_delimiter = ',', num_args = 2)]
    doc_len: Option<Vec<usize>>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    corpus: CorpusArgs,
}

#[derive(Args, Debug, Clone)]
struct EmbeddingArgs {
    /// Feature generators: cbow, skg
    #[arg(long, value_delimiter = ',')]
    feature_gens: Option<Vec<EmbeddingMode>>,
    /// Embedding dimension
    #[arg(long)]
    dim: Option<usize>,
    /// Embedding training epochs
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Args, Debug)]
struct FeaturizeArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    embedding: EmbeddingArgs,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    embedding: EmbeddingArgs,
    /// clean: selection and sampling inside training folds; leaky: on the full data
    #[arg(long)]
    cv_mode: Option<CvMode>,
    /// Worker threads (default: available processors)
    #[arg(long)]
    jobs: Option<usize>,
    /// Kernels: link, rbfk, polyk
    #[arg(long, value_delimiter = ',')]
    kernels: Option<Vec<KernelKind>>,
    /// Samplers: ord, smote, bsmote, svmsmote
    #[arg(long, value_delimiter = ',')]
    samplers: Option<Vec<Provenance>>,
    /// Feature sets: alm, sgm
    #[arg(long, value_delimiter = ',')]
    feature_sets: Option<Vec<FeatureSetKind>>,
    /// Smells, e.g. blob,lm
    #[arg(long, value_delimiter = ',')]
    smells: Option<Vec<SmellKind>>,
    /// Number of cross-validation folds
    #[arg(long)]
    folds: Option<usize>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// report.json written by `experiment`
    #[arg(long)]
    report: PathBuf,
    /// kernel, sampling, feature_gen or feature_set
    #[arg(long)]
    grouping: Grouping,
    /// accuracy, auc or f_measure
    #[arg(long, default_value = "accuracy")]
    metric: Metric,
    /// Output directory (default: next to the report)
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Internal(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Internal(e)
    }
}

type CmdResult<T = ()> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CmdResult<T> {
    Err(Failure::Usage(msg.into()))
}

fn load_config(common: &Common) -> CmdResult<RunConfig> {
    match &common.config {
        Some(path) => RunConfig::load(path).map_err(Failure::Usage),
        None => Ok(RunConfig::default()),
    }
}

fn resolve_seed(common: &Common, cfg: &RunConfig) -> CmdResult<u64> {
    match common.seed.or(cfg.seed) {
        Some(s) => Ok(s),
        None => usage("a master seed is required: pass --seed, set SMELLFORGE_SEED, or put \"seed\" in the config"),
    }
}

fn resolve_out(common: &Common, cfg: &RunConfig) -> CmdResult<PathBuf> {
    match common.out.clone().or_else(|| cfg.out.clone()) {
        Some(p) => Ok(p),
        None => usage("an output directory is required: pass --out or put \"out\" in the config"),
    }
}

fn apply_corpus_flags(args: &CorpusArgs, cfg: &mut RunConfig) -> CmdResult {
    if let Some(d) = &args.docs {
        cfg.documents = Some(d.clone());
    }
    if let Some(l) = &args.labels {
        cfg.labels = Some(l.clone());
    }
    let spec = &mut cfg.synthetic;
    if let Some(n) = args.n {
        spec.n_packages = n;
    }
    if let Some(s) = args.signal {
        spec.signal_strength = s;
    }
    if let Some(v) = args.vocab {
        spec.vocab_size = v;
    }
    if let Some(r) = &args.ratios {
        let Ok(arr) = <[f64; 8]>::try_from(r.as_slice()) else {
            return usage(format!("--ratios needs exactly 8 values, got {}", r.len()));
        };
        spec.positive_ratios = arr;
    }
    if let Some(len) = &args.doc_len {
        spec.min_doc_len = len[0];
        spec.max_doc_len = len[1];
    }
    if cfg.documents.is_some() != cfg.labels.is_some() {
        return usage("documents and labels must be given together");
    }
    Ok(())
}

fn apply_embedding_flags(args: &EmbeddingArgs, cfg: &mut RunConfig) {
    if let Some(g) = &args.feature_gens {
        cfg.grid.feature_gens = g.clone();
    }
    if let Some(d) = args.dim {
        cfg.grid.embedding.dim = d;
    }
    if let Some(e) = args.epochs {
        cfg.grid.embedding.epochs = e;
    }
}

/// Loads the configured corpus files, or generates the synthetic corpus from
/// the master seed.
fn obtain_corpus(cfg: &RunConfig, seed: u64) -> CmdResult<Corpus> {
    match (&cfg.documents, &cfg.labels) {
        (Some(d), Some(l)) => load_corpus(d, l).map_err(|e| Failure::Usage(format!("cannot load corpus: {e}"))),
        _ => {
            cfg.synthetic.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            generate_synthetic_corpus(&cfg.synthetic, seed)
                .context("synthetic corpus generation failed")
                .map_err(Failure::Internal)
        }
    }
}

fn create_dir(path: &Path) -> CmdResult {
    fs::create_dir_all(path)
        .with_context(|| format!("cannot create {}", path.display()))
        .map_err(Failure::Internal)
}

fn distribution_table(corpus: &Corpus) -> String {
    let mut out = format!("{:<6} {:<32} {:>8} {:>8} {:>8}\n", "Smell", "Name", "Without", "With", "Total");
    for smell in SmellKind::ALL {
        let (without, with) = corpus.class_distribution(smell);
        out.push_str(&format!(
            "{:<6} {:<32} {:>8} {:>8} {:>8}\n",
            smell.as_str(),
            smell.full_name(),
            without,
            with,
            without + with
        ));
    }
    out
}

fn cmd_synth(args: SynthArgs) -> CmdResult {
    let mut cfg = load_config(&args.common)?;
    apply_corpus_flags(&args.corpus, &mut cfg)?;
    let seed = resolve_seed(&args.common, &cfg)?;
    let out = resolve_out(&args.common, &cfg)?;
    let spec: &SyntheticSpec = &cfg.synthetic;
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let corpus = generate_synthetic_corpus(spec, seed).context("synthetic corpus generation failed")?;
    create_dir(&out)?;
    write_corpus(&corpus, &out.join("documents.csv"), &out.join("labels.csv"))
        .context("cannot write corpus files")?;
    print!("{}", distribution_table(&corpus));
    Ok(())
}

fn cmd_featurize(args: FeaturizeArgs) -> CmdResult {
    let mut cfg = load_config(&args.common)?;
    apply_corpus_flags(&args.corpus, &mut cfg)?;
    apply_embedding_flags(&args.embedding, &mut cfg);
    let seed = resolve_seed(&args.common, &cfg)?;
    let out = resolve_out(&args.common, &cfg)?;
    cfg.grid.master_seed = seed;
    if cfg.grid.feature_gens.is_empty() {
        return usage("no feature generators selected");
    }
    cfg.grid.embedding.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let corpus = obtain_corpus(&cfg, seed)?;
    create_dir(&out)?;
    for &mode in &cfg.grid.feature_gens {
        let started = Instant::now();
        let model = train_embedding(&corpus, &cfg.grid.embedding_for(mode))
            .with_context(|| format!("{mode} embedding training failed"))?;
        let name = mode.as_str().to_ascii_lowercase();
        model
            .save(&out.join(format!("embedding_{name}.txt")))
            .context("cannot write embedding")?;
        featurize(&corpus, &model)
            .write_csv(&out.join(format!("features_{name}.csv")))
            .context("cannot write features")?;
        let loss = model.epoch_losses().last().copied().unwrap_or(f64::NAN);
        println!(
            "{mode}: {} words, final epoch loss {loss:.4}, {:.1}s",
            model.vocab_len(),
            started.elapsed().as_secs_f64()
        );
    }
    Ok(())
}

fn summary_line(report: &ExperimentReport, grouping: Grouping) -> String {
    let mut parts = Vec::new();
    for name in grouping.values() {
        let mean = |m: Metric| report.mean_metric(m, |c| grouping.key(c) == name);
        if let (Some(a), Some(u), Some(f)) = (mean(Metric::Accuracy), mean(Metric::Auc), mean(Metric::FMeasure)) {
            parts.push(format!("{name} acc {a:.2} auc {u:.2} f {f:.2}"));
        }
    }
    format!("{grouping}: {}", parts.join(" | "))
}

fn cmd_experiment(args: ExperimentArgs) -> CmdResult {
    let mut cfg = load_config(&args.common)?;
    apply_corpus_flags(&args.corpus, &mut cfg)?;
    apply_embedding_flags(&args.embedding, &mut cfg);
    let seed = resolve_seed(&args.common, &cfg)?;
    let out = resolve_out(&args.common, &cfg)?;
    let grid = &mut cfg.grid;
    grid.master_seed = seed;
    if let Some(m) = args.cv_mode {
        grid.settings.cv_mode = m;
    }
    if let Some(k) = &args.kernels {
        grid.kernels = k.clone();
    }
    if let Some(s) = &args.samplers {
        grid.samplings = s.clone();
    }
    if let Some(f) = &args.feature_sets {
        grid.feature_sets = f.clone();
    }
    if let Some(s) = &args.smells {
        grid.smells = s.clone();
    }
    if let Some(k) = args.folds {
        grid.settings.k_folds = k;
    }
    if let Some(j) = args.jobs {
        cfg.jobs = Some(j);
    }
    if cfg.jobs == Some(0) {
        return usage("--jobs must be at least 1");
    }
    cfg.grid.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let corpus = obtain_corpus(&cfg, seed)?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().context("cannot start worker pool")?;
    let started = Instant::now();
    let report = pool
        .install(|| run_grid(&corpus, &cfg.grid))
        .context("experiment grid failed")?;
    eprintln!(
        "{} cells ({} skipped) in {:.1}s",
        report.cells.len(),
        report.cells.iter().filter(|c| !c.is_ok()).count(),
        started.elapsed().as_secs_f64()
    );

    create_dir(&out)?;
    write_report_outputs(&report, &out).context("cannot write report outputs")?;
    let resolved = serde_json::to_string_pretty(&RunConfig { seed: Some(seed), ..cfg })
        .context("cannot serialize run configuration")?;
    fs::write(out.join("config.json"), resolved).context("cannot write config.json")?;
    for g in Grouping::ALL {
        println!("{}", summary_line(&report, g));
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> CmdResult {
    let text = match fs::read_to_string(&args.report) {
        Ok(t) => t,
        Err(e) => return usage(format!("cannot read {}: {e}", args.report.display())),
    };
    let report = ExperimentReport::from_json(&text)
        .map_err(|e| Failure::Usage(format!("malformed report {}: {e}", args.report.display())))?;
    let comparison: GroupComparison = match compare_groups(&report, args.grouping, args.metric) {
        Ok(c) => c,
        Err(e) => return usage(format!("cannot compare groups: {e}")),
    };
    let out = args.out.unwrap_or_else(|| {
        args.report
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."))
    });
    let written = write_comparison(&out, &comparison).context("cannot write comparison")?;
    print!("{}\n{}", stats_table_markdown(&comparison), matrix_markdown(&comparison));
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Featurize(a) => cmd_featurize(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
