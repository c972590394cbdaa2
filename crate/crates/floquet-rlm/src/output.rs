//! File emission: full-precision tables (CSV or JSON) and JSON documents.
//!
//! Every number is written with 17 significant digits so downstream fitting
//! or plotting reproduces the computed values bit-for-bit. Writing happens
//! strictly after computation, single-threaded, in a fixed order — two runs
//! of the same scenario produce byte-identical files.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::OutputFormat;
use crate::error::{Error, Result};

/// One table cell; `None` marks a masked value (written as an empty CSV
/// field or a JSON null), kept distinct from an actual zero.
pub type Cell = Option<f64>;

/// Column-labelled numeric table.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }
}

/// Shortest lossless decimal for an f64 is 17 significant digits.
pub fn full_precision(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `table` under `dir` as `<stem>.csv` or `<stem>.json`.
pub fn write_table(dir: &Path, stem: &str, table: &Table, format: OutputFormat) -> Result<PathBuf> {
    let path = match format {
        OutputFormat::Csv => {
            let path = dir.join(format!("{stem}.csv"));
            let mut text = String::new();
            text.push_str(&table.columns.join(","));
            text.push('\n');
            for row in &table.rows {
                let mut first = true;
                for cell in row {
                    if !first {
                        text.push(',');
                    }
                    first = false;
                    if let Some(x) = cell {
                        text.push_str(&full_precision(*x));
                    }
                }
                text.push('\n');
            }
            std::fs::write(&path, text)?;
            path
        }
        OutputFormat::Json => {
            let path = dir.join(format!("{stem}.json"));
            write_pretty(&path, table)?;
            path
        }
    };
    Ok(path)
}

/// Writes any serializable document as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let path = dir.join(name);
    write_pretty(&path, value)?;
    Ok(path)
}

fn write_pretty<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    file.write_all(text.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}
