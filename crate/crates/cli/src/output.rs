use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Writes a fully rendered document to `path`, or to stdout when `None`.
/// Nothing is written before rendering has succeeded, so a failed command
/// leaves no partial file behind.
pub fn emit(path: Option<&Path>, body: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, body)
            .map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

/// Renders rows as CSV with a fixed header; cells are written with `{}` so
/// output is byte-stable.
pub fn csv(header: &str, rows: &[Vec<f64>]) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Rows as a JSON array of objects keyed by the header columns.
pub fn json_rows(header: &str, rows: &[Vec<f64>]) -> String {
    let keys: Vec<&str> = header.split(',').collect();
    let objects: Vec<serde_json::Map<String, serde_json::Value>> = rows
        .iter()
        .map(|row| {
            keys.iter()
                .zip(row)
                .map(|(k, v)| (k.to_string(), serde_json::json!(v)))
                .collect()
        })
        .collect();
    to_json(&objects)
}

/// Table output in the requested format.
pub fn table(format: Format, header: &str, rows: &[Vec<f64>]) -> String {
    match format {
        Format::Csv => csv(header, rows),
        Format::Json => json_rows(header, rows),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rows() {
        let s = csv("a,b", &[vec![0.0, 0.77], vec![100.0, 1e-3]]);
        assert_eq!(s, "a,b\n0,0.77\n100,0.001\n");
    }

    #[test]
    fn json_rows_keyed_by_header() {
        let s = json_rows("t_us,S", &[vec![0.0, 2.5]]);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v[0]["S"], 2.5);
    }
}
