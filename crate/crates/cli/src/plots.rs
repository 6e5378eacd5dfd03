//! Plot-data tables written as CSV.
//!
//! Files use `\n` line endings, a header row, and Rust's shortest
//! round-trip float formatting, which is locale independent and exact.

use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PlotTable {
    /// File stem, without extension.
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl PlotTable {
    pub fn new(name: impl Into<String>, headers: &[&str]) -> Self {
        PlotTable {
            name: name.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format_float(*v))).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:?}")
    }
}

/// Writes `table` into `dir` and returns the file path.
pub fn emit_plot_data(table: &PlotTable, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(table.file_name());
    std::fs::write(&path, table.to_csv_bytes()).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// Lowercase file-name fragment: runs of other characters become `_`.
pub fn slug(label: &str) -> String {
    let mut out = String::new();
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}
