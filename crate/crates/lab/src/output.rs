//! CSV tables with fixed 17-significant-digit formatting and JSON sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::LabError;

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(k) => k.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}
impl From<usize> for Cell {
    fn from(k: usize) -> Self {
        Cell::Int(k as i64)
    }
}
impl From<u32> for Cell {
    fn from(k: u32) -> Self {
        Cell::Int(k as i64)
    }
}
impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}
impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

/// `row![a, b, c]` builds a `Vec<Cell>`.
#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::output::Cell::from($x)),*] };
}

/// One CSV artifact plus the extra sidecar entries specific to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub extra: Value,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&'static str]) -> Self {
        Self { name: name.into(), columns: columns.to_vec(), rows: Vec::new(), extra: Value::Null }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "{}", self.name);
        self.rows.push(row);
    }

    pub fn with_extra(mut self, extra: Value) -> Self {
        self.extra = extra;
        self
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }
}

/// A JSON document written next to the tables (e.g. the SOC report).
#[derive(Debug, Clone, PartialEq)]
pub struct JsonArtifact {
    pub name: String,
    pub body: Value,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Artifacts {
    pub tables: Vec<Table>,
    pub documents: Vec<JsonArtifact>,
}

/// Everything needed to reproduce a run, repeated in every sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct RunInfo {
    pub command: &'static str,
    pub config: Value,
    pub seed: Option<u64>,
}

impl RunInfo {
    fn header(&self) -> Value {
        json!({
            "command": self.command,
            "code_version": CODE_VERSION,
            "config": self.config,
            "seed": self.seed,
            "tolerances": tolerances(),
        })
    }
}

/// Every threshold the core applies, keyed by name.
pub fn tolerances() -> Value {
    use dirac_backaction_core::{backaction, fit, foldy_wouthuysen, oscillator::SpectrumReport, propagate, soc, spectral};
    json!({
        "leakage_gate_default": backaction::DEFAULT_LEAKAGE_GATE,
        "leakage_top_fraction": backaction::DEFAULT_LEAKAGE_FRACTION,
        "norm_drift": propagate::NORM_DRIFT_TOL,
        "propagator_drop": propagate::DEFAULT_DROP_TOL,
        "hermitian": spectral::HERMITIAN_TOL,
        "spectrum_energy_over_mc2": SpectrumReport::ENERGY_TOL,
        "spectrum_overlap": SpectrumReport::OVERLAP_TOL,
        "zb_fit_residual_threshold": fit::ZB_RESIDUAL_THRESHOLD,
        "fw_interior_fraction_default": foldy_wouthuysen::DEFAULT_INTERIOR_FRACTION,
        "soc_aliasing": soc::ALIASING_TOL,
        "soc_validity_k_ratio": soc::VALIDITY_K_RATIO,
        "soc_min_grid_points": soc::MIN_GRID_POINTS,
        "csv_float_format": "{:.16e}",
    })
}

pub fn write_table(dir: &Path, table: &Table, info: &RunInfo) -> Result<PathBuf, LabError> {
    let path = dir.join(table.file_name());
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    w.flush()?;
    let mut meta = info.header();
    meta["artifact"] = json!(table.file_name());
    meta["columns"] = json!(table.columns);
    meta["rows"] = json!(table.rows.len());
    if !table.extra.is_null() {
        meta["details"] = table.extra.clone();
    }
    write_json(&dir.join(format!("{}.meta.json", table.name)), &meta)?;
    Ok(path)
}

pub fn write_document(dir: &Path, doc: &JsonArtifact, info: &RunInfo) -> Result<PathBuf, LabError> {
    let path = dir.join(format!("{}.json", doc.name));
    let mut body = doc.body.clone();
    body["run"] = info.header();
    write_json(&path, &body)?;
    Ok(path)
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), LabError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes all artifacts plus `run.meta.json` listing them.
pub fn write_all(dir: &Path, artifacts: &Artifacts, info: &RunInfo) -> Result<Vec<PathBuf>, LabError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in &artifacts.tables {
        written.push(write_table(dir, t, info)?);
    }
    for d in &artifacts.documents {
        written.push(write_document(dir, d, info)?);
    }
    let mut meta = info.header();
    meta["status"] = json!("ok");
    meta["artifacts"] = json!(written.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy()).collect::<Vec<_>>());
    write_json(&dir.join("run.meta.json"), &meta)?;
    Ok(written)
}

/// Failure diagnostic written to `run.meta.json` in place of the artifacts.
pub fn write_failure(dir: &Path, info: Option<&RunInfo>, err: &LabError) -> Result<(), LabError> {
    fs::create_dir_all(dir)?;
    let mut meta = match info {
        Some(i) => i.header(),
        None => json!({ "code_version": CODE_VERSION }),
    };
    meta["status"] = json!("failed");
    meta["error_kind"] = json!(err.kind());
    meta["exit_code"] = json!(err.exit_code());
    meta["message"] = json!(err.to_string());
    if let LabError::Job { index, params, .. } = err {
        meta["failed_job"] = json!({ "index": index, "parameters": params });
    }
    write_json(&dir.join("run.meta.json"), &meta)
}
