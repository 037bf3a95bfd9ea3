//! Output files: JSON documents and CSV tables, both carrying the same header.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::Task;
use crate::error::{Error, Result};
use crate::params::Params;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub tool_version: String,
    pub task: Task,
    pub params: Params,
    /// Tolerances and discretisation settings of the run.
    pub settings: serde_json::Value,
}

impl Header {
    pub fn new(task: Task, params: Params, settings: impl Serialize) -> Result<Self> {
        Ok(Header {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            task,
            params,
            settings: serde_json::to_value(settings).map_err(io_err)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub header: Header,
    pub result: T,
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

fn write_file(path: &Path, text: &str) -> Result<PathBuf> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_err(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| io_err(format!("{}: {e}", path.display())))?;
    Ok(path.to_path_buf())
}

/// Pretty JSON `{"header": …, "result": …}` with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, header: &Header, result: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(&Document { header: header.clone(), result }).map_err(io_err)?;
    text.push('\n');
    write_file(path, &text)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Document<T>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| io_err(format!("{}: {e}", path.display())))
}

/// Formats a float with 17 significant digits; non-finite values as `nan`, `inf`, `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// CSV text: `# <header json>`, the column names, then one row per line.
pub fn csv_text<'a>(header: &Header, columns: &[&str], rows: impl IntoIterator<Item = &'a [f64]>) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "# {}", serde_json::to_string(header).map_err(io_err)?);
    let _ = writeln!(out, "{}", columns.join(","));
    for (k, row) in rows.into_iter().enumerate() {
        if row.len() != columns.len() {
            return Err(Error::InvalidArgument(format!("row {k} has {} values for {} columns", row.len(), columns.len())));
        }
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    Ok(out)
}

pub fn write_csv(path: &Path, header: &Header, columns: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf> {
    let text = csv_text(header, columns, rows.iter().map(Vec::as_slice))?;
    write_file(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<PathBuf> {
    write_file(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> Header {
        Header::new(Task::Shoot, Params { m: 2.0, q: 0.5, sigma: 2.0, dim: 1 }, serde_json::json!({"rtol": 1e-13})).unwrap()
    }

    #[test]
    fn floats_keep_17_digits() {
        for x in [0.1, 1.0 / 3.0, 203.877_812_345_678_9, 1e-300, -2.5e17, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(f64::NAN), "nan");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn csv_layout() {
        let rows = [vec![1.0, 2.0], vec![0.5, f64::INFINITY]];
        let text = csv_text(&header(), &["xi", "f"], rows.iter().map(Vec::as_slice)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# {"));
        let h: Header = serde_json::from_str(&lines[0][2..]).unwrap();
        assert_eq!(h, header());
        assert_eq!(lines[1], "xi,f");
        assert_eq!(lines[3], "5.0000000000000000e-1,inf");
        assert!(csv_text(&header(), &["a"], rows.iter().map(Vec::as_slice)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/x.json");
        write_json(&path, &header(), &vec![1.5, 2.5]).unwrap();
        let doc: Document<Vec<f64>> = read_json(&path).unwrap();
        assert_eq!(doc.header, header());
        assert_eq!(doc.result, vec![1.5, 2.5]);
    }
}
