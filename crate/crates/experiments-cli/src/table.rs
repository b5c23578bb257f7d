use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Int(b as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl fmt::Display for Cell {
    /// Floats use shortest round-trip formatting, in exponent form outside
    /// `[1e-4, 1e15)` so tiny residuals stay readable.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(x) if *x != 0.0 && x.is_finite() && !(1e-4..1e15).contains(&x.abs()) => {
                write!(f, "{x:e}")
            }
            Cell::Num(x) => write!(f, "{x}"),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub panel: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column; `None` for empty or non-numeric cells.
    pub fn numbers(&self, name: &str) -> Vec<Option<f64>> {
        let Some(i) = self.column(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .map(|r| match r[i] {
                Cell::Num(x) => Some(x),
                Cell::Int(k) => Some(k as f64),
                _ => None,
            })
            .collect()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputFile {
    pub panel: String,
    pub file: String,
    pub rows: usize,
    pub columns: Vec<String>,
}

/// Everything needed to regenerate the CSVs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub code_version: String,
    pub name: String,
    pub preset: Option<String>,
    pub master_seed: u64,
    pub config: ExperimentConfig,
    pub outputs: Vec<OutputFile>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultSet {
    pub manifest: Manifest,
    pub tables: Vec<ResultTable>,
}

impl ResultSet {
    pub fn table(&self, panel: &str) -> Option<&ResultTable> {
        self.tables.iter().find(|t| t.panel == panel)
    }

    /// Writes `<panel>.csv` for every table, `manifest.json` and the resolved
    /// `config.toml` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", t.panel));
            std::fs::write(&path, t.to_csv()?)?;
            written.push(path);
        }
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        std::fs::write(&path, text)?;
        written.push(path);
        let path = dir.join("config.toml");
        std::fs::write(&path, self.manifest.config.to_toml())?;
        written.push(path);
        Ok(written)
    }
}
