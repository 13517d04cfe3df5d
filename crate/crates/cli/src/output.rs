//! Result files written by `run` and `compare`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tbo::harness::{ComparisonTable, ExperimentReport};

use crate::config::{CompareConfig, RunConfig};
use crate::error::CliError;

pub const OUTPUT_DIR_ENV: &str = "TBO_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "tbo-output";
pub const TOTAL_ROW: &str = "Total Average Error";

/// `--out`, then `$TBO_OUTPUT_DIR`, then `./tbo-output`.
pub fn output_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

fn prepare(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct RunDocument<'a> {
    config: &'a RunConfig,
    report: &'a ExperimentReport,
}

/// Writes `report.json`, `trace.csv` and `regions.csv`.
pub fn write_run(dir: &Path, config: &RunConfig, report: &ExperimentReport) -> Result<Vec<PathBuf>, CliError> {
    prepare(dir)?;
    let report_path = dir.join("report.json");
    write_json(&report_path, &RunDocument { config, report })?;

    let trace_path = dir.join("trace.csv");
    let mut trace = csv::Writer::from_path(&trace_path)?;
    trace.write_record(["iteration", "mean_best_cost", "mean_error_pct"])?;
    for p in &report.trace {
        trace.write_record([p.iteration.to_string(), p.mean_best_cost.to_string(), p.mean_error_pct.to_string()])?;
    }
    trace.flush()?;

    let regions_path = dir.join("regions.csv");
    let mut regions = csv::Writer::from_path(&regions_path)?;
    let dim = report.benchmark.dim;
    let mut header: Vec<String> = ["repetition", "restart", "iteration", "chosen"].map(String::from).to_vec();
    header.extend((0..dim).map(|i| format!("lower_{i}")));
    header.extend((0..dim).map(|i| format!("upper_{i}")));
    header.push("global_best_cost".into());
    regions.write_record(&header)?;
    for row in &report.regions {
        let mut record = vec![
            row.repetition.to_string(),
            row.restart.to_string(),
            row.iteration.to_string(),
            row.chosen.to_string(),
        ];
        record.extend(row.lower.iter().chain(&row.upper).map(f64::to_string));
        record.push(row.global_best_cost.to_string());
        regions.write_record(&record)?;
    }
    regions.flush()?;
    Ok(vec![report_path, trace_path, regions_path])
}

#[derive(Serialize)]
struct CompareDocument<'a> {
    config: &'a CompareConfig,
    columns: &'a [String],
    rows: Vec<CompareRow<'a>>,
    #[serde(rename = "Total Average Error", skip_serializing_if = "Option::is_none")]
    total_average_error: Option<&'a [f64]>,
    reports: Vec<&'a ExperimentReport>,
}

#[derive(Serialize)]
struct CompareRow<'a> {
    benchmark: &'a str,
    dim: usize,
    mean_error_pct: Vec<f64>,
}

/// Writes `comparison.csv` (one line per cell plus total lines) and
/// `comparison.json`.
pub fn write_comparison(dir: &Path, config: &CompareConfig, table: &ComparisonTable) -> Result<Vec<PathBuf>, CliError> {
    prepare(dir)?;
    let csv_path = dir.join("comparison.csv");
    let mut out = csv::Writer::from_path(&csv_path)?;
    out.write_record([
        "benchmark",
        "dim",
        "column",
        "particles",
        "mean_error_pct",
        "std_error_pct",
        "min_error_pct",
        "max_error_pct",
        "mean_evaluations",
    ])?;
    for row in &table.rows {
        for (label, r) in table.columns.iter().zip(&row.reports) {
            out.write_record([
                row.benchmark.id.name().to_string(),
                row.benchmark.dim.to_string(),
                label.clone(),
                r.particles.to_string(),
                r.mean_error.to_string(),
                r.std_error.to_string(),
                r.min_error.to_string(),
                r.max_error.to_string(),
                r.mean_evaluations.to_string(),
            ])?;
        }
    }
    if let Some(totals) = &table.total_average_error {
        let particles = table.rows[0].reports.iter().map(|r| r.particles);
        for ((label, total), p) in table.columns.iter().zip(totals).zip(particles) {
            out.write_record([TOTAL_ROW, "", label, &p.to_string(), &total.to_string(), "", "", "", ""])?;
        }
    }
    out.flush()?;

    let json_path = dir.join("comparison.json");
    let doc = CompareDocument {
        config,
        columns: &table.columns,
        rows: table
            .rows
            .iter()
            .map(|r| CompareRow {
                benchmark: r.benchmark.id.name(),
                dim: r.benchmark.dim,
                mean_error_pct: r.mean_errors(),
            })
            .collect(),
        total_average_error: table.total_average_error.as_deref(),
        reports: table.rows.iter().flat_map(|r| &r.reports).collect(),
    };
    write_json(&json_path, &doc)?;
    Ok(vec![csv_path, json_path])
}

/// Plain-text table for the terminal.
pub fn render_table(table: &ComparisonTable) -> String {
    let width = table.columns.iter().map(String::len).max().unwrap_or(0).max(10);
    let mut s = format!("{:<20}", "benchmark");
    for c in &table.columns {
        s += &format!(" {c:>width$}");
    }
    s.push('\n');
    for row in &table.rows {
        s += &format!("{:<20}", row.benchmark.label());
        for e in row.mean_errors() {
            s += &format!(" {:>width$}", format!("{e:.3}%"));
        }
        s.push('\n');
    }
    if let Some(totals) = &table.total_average_error {
        s += &format!("{TOTAL_ROW:<20}");
        for t in totals {
            s += &format!(" {:>width$}", format!("{t:.3}%"));
        }
        s.push('\n');
    }
    s
}
