use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// A single cell. Labels are only used for categorical columns.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Label(&'static str),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&'static str> for Cell {
    fn from(v: &'static str) -> Self {
        Cell::Label(v)
    }
}

/// Seventeen significant digits: enough to round-trip every `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => fmt_f64(*v),
                    Cell::Int(v) => v.to_string(),
                    Cell::Label(s) => (*s).to_string(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Numbers are written with the same seventeen digits as CSV; non-finite
    /// values become `null`.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n  \"columns\": [");
        let names: Vec<String> = self.columns.iter().map(|c| format!("\"{c}\"")).collect();
        out.push_str(&names.join(", "));
        out.push_str("],\n  \"rows\": [");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n    [" } else { ",\n    [" });
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) if v.is_finite() => fmt_f64(*v),
                    Cell::Num(_) => "null".into(),
                    Cell::Int(v) => v.to_string(),
                    Cell::Label(s) => format!("\"{s}\""),
                })
                .collect();
            out.push_str(&cells.join(", "));
            out.push(']');
        }
        let _ = write!(
            out,
            "{}]\n}}\n",
            if self.rows.is_empty() { "" } else { "\n  " }
        );
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Where the table goes: `--out`, else `$ZENO_OUT_DIR/<command>.<ext>`, else
/// `./<command>.<ext>`.
pub fn resolve_output(out: Option<&Path>, command: &str, format: Format) -> PathBuf {
    match out {
        Some(p) => p.to_path_buf(),
        None => {
            let dir = std::env::var_os(crate::OUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."));
            dir.join(format!("{command}.{}", format.extension()))
        }
    }
}

/// `results.csv` → `results.config.json`.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".into());
    output.with_file_name(format!("{stem}.config.json"))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
