pub mod cluster;
pub mod data;
pub mod ec;
pub mod model;
pub mod run;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use spotbot_core::corpus::Label;

/// Validation errors exit with code 1, runtime errors with code 2.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

pub type CliResult<T = ()> = Result<T, CliError>;

impl CliError {
    pub fn validation(msg: impl Into<String>) -> CliError {
        CliError::Validation(msg.into())
    }

    pub fn runtime(msg: impl std::fmt::Display) -> CliError {
        CliError::Runtime(msg.to_string())
    }
}

pub fn require_file(path: &Path, what: &str) -> CliResult {
    if !path.is_file() {
        return Err(CliError::validation(format!(
            "{what} not found: {}",
            path.display()
        )));
    }
    Ok(())
}

pub fn require_dir(path: &Path, what: &str) -> CliResult {
    if !path.is_dir() {
        return Err(CliError::validation(format!(
            "{what} is not a directory: {}",
            path.display()
        )));
    }
    Ok(())
}

/// Shortest-roundtrip formatting keeps CSV output byte-deterministic.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

/// Write a CSV with a fixed header; field values must not contain commas.
pub fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> CliResult {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let mut first = true;
        for field in row {
            if field.contains(',') || field.contains('\n') {
                return Err(CliError::runtime(format!(
                    "field contains a delimiter: {field:?}"
                )));
            }
            if !first {
                out.push(',');
            }
            let _ = write!(out, "{field}");
            first = false;
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

/// Minimal CSV reader for the pipeline's own comma-separated files.
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn read(path: &Path) -> CliResult<CsvTable> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| CliError::validation(format!("{}: empty file", path.display())))?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<String> = line.split(',').map(str::to_string).collect();
            if fields.len() != header.len() {
                return Err(CliError::validation(format!(
                    "{} line {}: expected {} fields, found {}",
                    path.display(),
                    i + 2,
                    header.len(),
                    fields.len()
                )));
            }
            rows.push(fields);
        }
        Ok(CsvTable { header, rows })
    }

    pub fn column_index(&self, name: &str) -> CliResult<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::validation(format!("missing column `{name}`")))
    }

    pub fn f64_column(&self, name: &str) -> CliResult<Vec<f64>> {
        let idx = self.column_index(name)?;
        self.rows
            .iter()
            .map(|r| {
                r[idx]
                    .parse::<f64>()
                    .map_err(|_| CliError::validation(format!("bad float `{}` in {name}", r[idx])))
            })
            .collect()
    }
}

/// Per-text clustering output, serialized as labels.json.
#[derive(Debug, Serialize, Deserialize)]
pub struct LabelsFile {
    pub algo: String,
    pub params: String,
    pub texts: Vec<TextLabels>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TextLabels {
    pub doc_id: String,
    pub label: Label,
    pub k_found: usize,
    pub noise_ratio: f64,
    pub labels: Vec<usize>,
}

impl LabelsFile {
    pub fn save(&self, path: &Path) -> CliResult {
        let json = serde_json::to_vec_pretty(self).map_err(CliError::runtime)?;
        fs::write(path, json).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> CliResult<LabelsFile> {
        let bytes =
            fs::read(path).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        serde_json::from_slice(&bytes)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
    }
}

/// Parse "a..b" (inclusive) or "a,b,c" into a sorted list.
pub fn parse_grid(spec: &str) -> CliResult<Vec<usize>> {
    let spec = spec.trim();
    let values: Vec<usize> = if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo
            .trim()
            .parse()
            .map_err(|_| CliError::validation(format!("bad grid `{spec}`")))?;
        let hi: usize = hi
            .trim()
            .parse()
            .map_err(|_| CliError::validation(format!("bad grid `{spec}`")))?;
        if lo > hi {
            return Err(CliError::validation(format!("empty grid `{spec}`")));
        }
        (lo..=hi).collect()
    } else {
        spec.split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| CliError::validation(format!("bad grid `{spec}`")))
            })
            .collect::<CliResult<Vec<usize>>>()?
    };
    if values.is_empty() {
        return Err(CliError::validation(format!("empty grid `{spec}`")));
    }
    Ok(values)
}

pub fn parse_lambda_grid(spec: &str) -> CliResult<Vec<f64>> {
    let grid: Vec<f64> = spec
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::validation(format!("bad lambda `{t}`")))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    if grid.is_empty() || grid.iter().any(|l| *l <= 0.0) {
        return Err(CliError::validation("lambda grid must be positive"));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_range_and_list() {
        assert_eq!(parse_grid("1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_grid("2,5").unwrap(), vec![2, 5]);
        assert!(parse_grid("3..1").is_err());
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn float_formatting_roundtrips() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 123456.789] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }
}
