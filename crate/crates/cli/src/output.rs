use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use eitcav_core::xpm::EitMediumParams;
use eitcav_core::DeviceParams;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::Format;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] eitcav_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error("oracle guard: {what} deviates by {deviation:.3e} (limit {limit:.0e})")]
    OracleMismatch {
        what: &'static str,
        deviation: f64,
        limit: f64,
    },
}

impl CliError {
    /// 1 for I/O, 2 for rejected input, 3 for a tripped numerical guard.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(eitcav_core::Error::Io { .. }) | CliError::Io { .. } => 1,
            CliError::Core(e) if e.is_numerical_guard() => 3,
            CliError::Core(_) | CliError::Usage(_) => 2,
            CliError::OracleMismatch { .. } => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

/// Column-ordered table rendered as CSV or as `{"columns": [..], "rows": [[..]]}`.
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

    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Csv => Ok(self.csv()),
            Format::Json => Ok(self.json()),
            Format::Text => Err(CliError::Usage("tables are written as csv or json".into())),
        }
    }

    fn csv(&self) -> String {
        let mut out = self.columns.join(", ");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(x) => format!("{x:.16e}"),
                    Cell::Int(n) => n.to_string(),
                    Cell::Text(s) => s.clone(),
                })
                .collect();
            out.push_str(&cells.join(", "));
            out.push('\n');
        }
        out
    }

    fn json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|c| match c {
                            Cell::Num(x) => number(*x),
                            Cell::Int(n) => Value::from(*n),
                            Cell::Text(s) => Value::from(s.as_str()),
                        })
                        .collect(),
                )
            })
            .collect();
        let doc = serde_json::json!({ "columns": self.columns, "rows": rows });
        pretty(&doc)
    }
}

/// Finite values as JSON numbers, anything else as null.
pub fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data always serialises");
    s.push('\n');
    s
}

/// Writes `text` to `out`, or to standard output when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

pub const DETERMINISM_NOTE: &str =
    "No random numbers are drawn and every sum runs in a fixed order: identical inputs give byte-identical outputs.";

/// Record of one run, written next to its data file.
#[derive(Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub preset: Option<String>,
    pub config: Option<PathBuf>,
    pub device: DeviceParams,
    pub medium: Option<EitMediumParams>,
    pub options: Value,
    pub outputs: Vec<PathBuf>,
    pub determinism: &'static str,
    /// Cross-check results, when any were requested.
    pub checks: Option<Value>,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn write_manifest(manifest: &RunManifest) -> CliResult<()> {
    let Some(first) = manifest.outputs.first() else {
        return Ok(());
    };
    let path = manifest_path(first);
    fs::write(&path, pretty(manifest)).map_err(|source| CliError::Io { path, source })
}
