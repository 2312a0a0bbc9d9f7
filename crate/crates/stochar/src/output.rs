//! CSV tables, point files and run manifests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

/// A CSV cell. Reals print with 17 significant digits so that files
/// round-trip bit-exactly.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "true" } else { "false" }.into())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Real)
    }
}

pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                match c {
                    Cell::Real(v) => s.push_str(&format_real(*v)),
                    Cell::Int(v) => write!(s, "{v}").unwrap(),
                    Cell::Text(t) => s.push_str(t),
                    Cell::Empty => {}
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Coordinate column names `x1, x2, ...` with an optional prefix.
pub fn coord_header(prefix: &str, dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("{prefix}{i}")).collect()
}

pub fn coords(x: &[f64]) -> Vec<Cell> {
    x.iter().map(|&v| Cell::Real(v)).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum PointsError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Parses a point list: one point per line, comma-separated coordinates.
/// Blank lines, `#` comments and a leading non-numeric header are skipped.
pub fn parse_points(text: &str, dim: usize) -> Result<Vec<Vec<f64>>, PointsError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        match parsed {
            Ok(p) if p.len() == dim => out.push(p),
            Ok(p) => {
                return Err(PointsError::Parse {
                    line: i + 1,
                    msg: format!("{} coordinates, expected {dim}", p.len()),
                })
            }
            Err(_) if out.is_empty() && i == 0 => continue,
            Err(e) => {
                return Err(PointsError::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                })
            }
        }
    }
    Ok(out)
}

pub fn read_points(path: &Path, dim: usize) -> Result<Vec<Vec<f64>>, PointsError> {
    let text = std::fs::read_to_string(path).map_err(|source| PointsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_points(&text, dim)
}

pub const MANIFEST_SCHEMA: &str = "stochar.manifest/1";

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    pub model_sha256: Option<String>,
    pub seed: u64,
    pub seed_generated: bool,
    pub threads: usize,
    /// Fully resolved settings of the run.
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
    pub timings: Timings,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub wall_seconds: f64,
}

impl Timings {
    pub fn from(d: Duration) -> Self {
        Self {
            wall_seconds: d.as_secs_f64(),
        }
    }
}

/// Writes `name` into `dir`, creating the directory if needed.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}
