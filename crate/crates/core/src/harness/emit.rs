//! CSV and JSON rendering of experiment results.
//!
//! CSV files hold the header and data rows only; the metadata block (config
//! echo, master seed, per-point seeds, fit) goes to `<path>.meta.json` next
//! to them. JSON output carries the same columns and rows plus the metadata
//! inline. Floats are written in shortest round-trip form, so identical
//! results give identical bytes.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::Format;
use super::experiment::{ExperimentResult, Metadata, Table, TraceRow};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v:?}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

fn trace_grid(rows: &[TraceRow], n_terms: usize) -> Grid {
    let mut columns: Vec<String> = ["step", "tau", "sampled_index"].map(String::from).to_vec();
    columns.extend((1..=n_terms).map(|j| format!("p_{j}")));
    let rows = rows
        .iter()
        .map(|r| {
            let mut cells = vec![
                Cell::Int(r.step as u64),
                Cell::Float(r.tau),
                Cell::Int(r.sampled_index as u64),
            ];
            cells.extend(r.probabilities.iter().map(|&p| Cell::Float(p)));
            cells
        })
        .collect();
    Grid { columns, rows }
}

pub fn main_grid(result: &ExperimentResult) -> Grid {
    let names = |c: &[&str]| c.iter().map(|s| s.to_string()).collect();
    match &result.table {
        Table::Sweep(records) => Grid {
            columns: names(&["abscissa", "mean_fidelity", "std_error", "n_samples", "strategy", "model_tag", "seed"]),
            rows: records
                .iter()
                .map(|r| {
                    vec![
                        Cell::Float(r.abscissa),
                        Cell::Float(r.mean_fidelity),
                        Cell::Float(r.std_error),
                        Cell::Int(r.n_samples as u64),
                        Cell::Text(r.strategy.clone()),
                        Cell::Text(r.model_tag.clone()),
                        Cell::Int(r.seed),
                    ]
                })
                .collect(),
        },
        Table::Trace(rows) => trace_grid(rows, result.metadata.term_labels.len()),
        Table::ShadowBench(rows) => Grid {
            columns: names(&[
                "n_shots",
                "term",
                "exact_deviation",
                "deviation",
                "floored_deviation",
                "mean_deviation",
                "deviation_std",
                "mean_std",
                "variance_std",
            ]),
            rows: rows
                .iter()
                .map(|r| {
                    vec![
                        Cell::Int(r.n_shots as u64),
                        Cell::Text(r.term.clone()),
                        Cell::Float(r.exact_deviation),
                        Cell::Float(r.deviation),
                        Cell::Float(r.floored_deviation),
                        Cell::Float(r.mean_deviation),
                        Cell::Float(r.deviation_std),
                        Cell::Float(r.mean_std),
                        Cell::Float(r.variance_std),
                    ]
                })
                .collect(),
        },
    }
}

pub fn attached_trace_grid(result: &ExperimentResult) -> Option<Grid> {
    result
        .trace
        .as_ref()
        .map(|t| trace_grid(t, result.metadata.term_labels.len()))
}

pub fn render_csv(grid: &Grid) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::MalformedRecord(e.to_string());
    w.write_record(&grid.columns).map_err(csv_err)?;
    for row in &grid.rows {
        w.write_record(row.iter().map(|c| c.to_string())).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::MalformedRecord(e.to_string()))
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    columns: &'a [String],
    rows: &'a [Vec<Cell>],
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Grid>,
    metadata: &'a Metadata,
}

pub fn render_json(result: &ExperimentResult) -> Result<Vec<u8>> {
    let grid = main_grid(result);
    let doc = JsonDocument {
        columns: &grid.columns,
        rows: &grid.rows,
        trace: attached_trace_grid(result),
        metadata: &result.metadata,
    };
    let mut bytes = serde_json::to_vec_pretty(&doc)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn render_metadata(metadata: &Metadata) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(metadata)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn metadata_path(path: &Path) -> PathBuf {
    with_suffix(path, ".meta.json")
}

pub fn trace_path(path: &Path) -> PathBuf {
    with_suffix(path, ".trace.csv")
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the result and returns every path written.
pub fn emit(result: &ExperimentResult, format: Format, path: &Path) -> Result<Vec<PathBuf>> {
    match format {
        Format::Json => {
            write_file(path, &render_json(result)?)?;
            Ok(vec![path.to_path_buf()])
        }
        Format::Csv => {
            let mut written = vec![path.to_path_buf()];
            write_file(path, &render_csv(&main_grid(result))?)?;
            if let Some(trace) = attached_trace_grid(result) {
                let p = trace_path(path);
                write_file(&p, &render_csv(&trace)?)?;
                written.push(p);
            }
            let p = metadata_path(path);
            write_file(&p, &render_metadata(&result.metadata)?)?;
            written.push(p);
            Ok(written)
        }
    }
}
