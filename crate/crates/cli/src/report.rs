//! Reports and their CSV/JSON serialization.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use bigjump_core::tailmath::Verdict;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, OutputFormat};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    /// Numbers with 10 significant digits.
    pub fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_num(*v),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Num(v as f64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

pub fn format_num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.9e}")
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictLine {
    pub name: String,
    /// `None` when nothing was eligible for judgement.
    pub verdict: Option<Verdict>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    /// Defaults and calibrated values used by the run.
    pub resolved: BTreeMap<String, f64>,
    pub table: Table,
    pub verdicts: Vec<VerdictLine>,
    pub wall_clock_seconds: f64,
    pub library_version: String,
    pub seed: u64,
}

impl ExperimentReport {
    pub fn failed(&self) -> bool {
        self.verdicts.iter().any(|v| v.verdict == Some(Verdict::Fail))
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    config: &'a ExperimentConfig,
    resolved: &'a BTreeMap<String, f64>,
    columns: &'a [String],
    n_rows: usize,
    verdicts: &'a [VerdictLine],
    wall_clock_seconds: f64,
    library_version: &'a str,
    seed: u64,
}

pub fn write_csv(table: &Table, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

/// Reads a CSV written by [`write_csv`]; fields that parse as numbers
/// become [`Cell::Num`].
pub fn read_csv(path: &Path) -> Result<Table> {
    let mut r = csv::Reader::from_path(path)?;
    let columns = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(
            rec?.iter()
                .map(|f| match f.parse::<f64>() {
                    Ok(v) => Cell::Num(v),
                    Err(_) => Cell::text(f),
                })
                .collect(),
        );
    }
    Ok(Table { columns, rows })
}

/// Writes `<dir>/<stem>.csv` plus a JSON sidecar, or a single
/// `<dir>/<stem>.json` holding the whole report.
pub fn emit_report(report: &ExperimentReport, dir: &Path, stem: &str, format: OutputFormat) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let json_path = dir.join(format!("{stem}.json"));
    match format {
        OutputFormat::Csv => {
            let csv_path = dir.join(format!("{stem}.csv"));
            write_csv(&report.table, &csv_path)?;
            let sidecar = Sidecar {
                config: &report.config,
                resolved: &report.resolved,
                columns: &report.table.columns,
                n_rows: report.table.rows.len(),
                verdicts: &report.verdicts,
                wall_clock_seconds: report.wall_clock_seconds,
                library_version: &report.library_version,
                seed: report.seed,
            };
            let text = serde_json::to_string_pretty(&sidecar)?;
            fs::write(&json_path, text).map_err(|e| CliError::io(&json_path, e))?;
            Ok(vec![csv_path, json_path])
        }
        OutputFormat::Json => {
            let text = serde_json::to_string_pretty(report)?;
            fs::write(&json_path, text).map_err(|e| CliError::io(&json_path, e))?;
            Ok(vec![json_path])
        }
    }
}
