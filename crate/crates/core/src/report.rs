//! Display tables written next to the JSON report: per-cell results, a
//! smell × configuration pivot, six-number summaries per grouping, rank-sum
//! p-value matrices and box-plot data. Tables round to two decimals; the
//! JSON keeps full precision.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::corpus::SmellKind;
use crate::error::{Error, Result};
use crate::eval::{ExperimentCell, ExperimentReport, GroupComparison, Metric};

const STATS_HEADER: [&str; 7] = ["group", "Min", "Max", "Mean", "Median", "25th", "75th"];

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn fmt2(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.2}")).unwrap_or_default()
}

fn stats_rows(c: &GroupComparison) -> Vec<[String; 7]> {
    c.groups
        .iter()
        .map(|g| {
            let s = g.stats;
            [
                g.group.clone(),
                format!("{:.2}", s.min),
                format!("{:.2}", s.max),
                format!("{:.2}", s.mean),
                format!("{:.2}", s.median),
                format!("{:.2}", s.p25),
                format!("{:.2}", s.p75),
            ]
        })
        .collect()
}

/// `group,Min,Max,Mean,Median,25th,75th`.
pub fn stats_table_csv(c: &GroupComparison) -> String {
    let mut out = STATS_HEADER.join(",");
    out.push('\n');
    for row in stats_rows(c) {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn stats_table_markdown(c: &GroupComparison) -> String {
    let mut out = format!("| {} |\n|{}\n", STATS_HEADER.join(" | "), "---|".repeat(STATS_HEADER.len()));
    for row in stats_rows(c) {
        let _ = writeln!(out, "| {} |", row.join(" | "));
    }
    out
}

pub fn matrix_markdown(c: &GroupComparison) -> String {
    let m = &c.ranksum;
    let mut out = format!("| group | {} |\n|{}\n", m.names.join(" | "), "---|".repeat(m.names.len() + 1));
    for (name, row) in m.names.iter().zip(&m.values) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.2}")).collect();
        let _ = writeln!(out, "| {name} | {} |", cells.join(" | "));
    }
    out
}

pub fn comparison_stem(c: &GroupComparison) -> String {
    format!("{}_{}", c.grouping, c.metric)
}

/// Writes `tables/<stem>.{csv,md}` and `matrices/<stem>.{csv,md}` under `out`.
pub fn write_comparison(out: &Path, c: &GroupComparison) -> Result<Vec<PathBuf>> {
    let tables = out.join("tables");
    let matrices = out.join("matrices");
    for dir in [&tables, &matrices] {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let stem = comparison_stem(c);
    let files = [
        (tables.join(format!("{stem}.csv")), stats_table_csv(c)),
        (tables.join(format!("{stem}.md")), stats_table_markdown(c)),
        (matrices.join(format!("{stem}.csv")), c.ranksum.to_csv_string()),
        (matrices.join(format!("{stem}.md")), matrix_markdown(c)),
    ];
    let mut written = Vec::new();
    for (path, text) in files {
        write_text(&path, &text)?;
        written.push(path);
    }
    Ok(written)
}

fn cell_row(c: &ExperimentCell) -> Vec<String> {
    let cfg = &c.config;
    vec![
        cfg.feature_gen.to_string(),
        cfg.feature_set.to_string(),
        cfg.sampling.to_string(),
        cfg.kernel.to_string(),
        cfg.smell.to_string(),
        if c.is_ok() { "ok" } else { "skipped" }.to_owned(),
        fmt2(c.metric(Metric::Accuracy)),
        fmt2(c.metric(Metric::Auc)),
        fmt2(c.metric(Metric::FMeasure)),
        c.reason.clone().unwrap_or_default(),
    ]
}

const CELL_HEADER: [&str; 10] = [
    "feature_gen",
    "feature_set",
    "sampling",
    "kernel",
    "smell",
    "status",
    "accuracy",
    "auc",
    "f_measure",
    "reason",
];

pub fn cells_csv(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CELL_HEADER)?;
    for c in &report.cells {
        w.write_record(cell_row(c))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

pub fn cells_markdown(report: &ExperimentReport) -> String {
    let mut out = format!("| {} |\n|{}\n", CELL_HEADER.join(" | "), "---|".repeat(CELL_HEADER.len()));
    for c in &report.cells {
        let _ = writeln!(out, "| {} |", cell_row(c).join(" | ").replace('\n', " "));
    }
    out
}

/// One row per smell, one column per feature_gen/feature_set/sampling/kernel
/// combination present in the report.
pub fn smell_pivot_csv(report: &ExperimentReport, metric: Metric) -> String {
    let mut columns: Vec<String> = Vec::new();
    for c in &report.cells {
        let cfg = &c.config;
        let key = format!("{}-{}-{}-{}", cfg.feature_gen, cfg.feature_set, cfg.sampling, cfg.kernel);
        if !columns.contains(&key) {
            columns.push(key);
        }
    }
    let mut out = format!("smell,{}\n", columns.join(","));
    for smell in SmellKind::ALL {
        if !report.cells.iter().any(|c| c.config.smell == smell) {
            continue;
        }
        out.push_str(smell.as_str());
        for key in &columns {
            let value = report.cells.iter().find(|c| {
                let cfg = &c.config;
                cfg.smell == smell
                    && format!("{}-{}-{}-{}", cfg.feature_gen, cfg.feature_set, cfg.sampling, cfg.kernel) == *key
            });
            out.push(',');
            out.push_str(&fmt2(value.and_then(|c| c.metric(metric))));
        }
        out.push('\n');
    }
    out
}

/// `grouping,metric,group,min,p25,median,p75,max,mean`, full precision.
pub fn boxplot_csv(comparisons: &[GroupComparison]) -> String {
    let mut out = String::from("grouping,metric,group,min,p25,median,p75,max,mean\n");
    for c in comparisons {
        for g in &c.groups {
            let s = g.stats;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                c.grouping, c.metric, g.group, s.min, s.p25, s.median, s.p75, s.max, s.mean
            );
        }
    }
    out
}

/// Writes `report.json`, every display table, the p-value matrices and
/// `boxplot.csv` into `out`. Returns the paths written.
pub fn write_report_outputs(report: &ExperimentReport, out: &Path) -> Result<Vec<PathBuf>> {
    let tables = out.join("tables");
    fs::create_dir_all(&tables).map_err(|e| Error::io(&tables, e))?;
    let mut written = Vec::new();
    let mut emit = |path: PathBuf, text: String| -> Result<()> {
        write_text(&path, &text)?;
        written.push(path);
        Ok(())
    };
    emit(out.join("report.json"), report.to_json()?)?;
    emit(tables.join("cells.csv"), cells_csv(report)?)?;
    emit(tables.join("cells.md"), cells_markdown(report))?;
    for metric in [Metric::Accuracy, Metric::Auc, Metric::FMeasure] {
        emit(
            tables.join(format!("smell_{metric}.csv")),
            smell_pivot_csv(report, metric),
        )?;
    }
    emit(out.join("boxplot.csv"), boxplot_csv(&report.comparisons))?;
    for c in &report.comparisons {
        written.extend(write_comparison(out, c)?);
    }
    Ok(written)
}
