//! Dense indirect-evidence matrix and its file formats.
//!
//! `EvidenceMatrix` holds the n×n matrix A of aggregated ratings.
//! Entry `A[x][y]` is the opinion **of** user `x` held **by** user `y`,
//! every entry lies in `[0, 1]`, and the diagonal is zero for matrices
//! produced by aggregation. The self-reference studies deliberately work
//! with a nonzero diagonal, so a second constructor admits diagonal values
//! in `[0, 1]`.
//!
//! Two serializations are supported:
//! - CSV: n rows of n comma-separated decimals (shortest round-trip form);
//! - JSON: `{"n": <int>, "entries": [[...], ...]}`.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense n×n matrix of aggregated ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceMatrix {
    n: usize,
    entries: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    entries: Vec<Vec<f64>>,
}

fn validate_entries(entries: &DMatrix<f64>, allow_diagonal: bool) -> Result<usize> {
    let n = entries.nrows();
    if entries.ncols() != n {
        return Err(Error::InvalidInstance(format!(
            "evidence matrix must be square, got {}x{}",
            n,
            entries.ncols()
        )));
    }
    if n < 2 {
        return Err(Error::InvalidInstance(format!(
            "evidence matrix needs at least 2 users, got {n}"
        )));
    }
    for x in 0..n {
        for y in 0..n {
            let v = entries[(x, y)];
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidInstance(format!(
                    "entry ({x},{y}) = {v} outside [0,1]"
                )));
            }
            if x == y && !allow_diagonal && v != 0.0 {
                return Err(Error::InvalidInstance(format!(
                    "diagonal entry ({x},{x}) = {v} must be 0"
                )));
            }
        }
    }
    Ok(n)
}

impl EvidenceMatrix {
    /// Builds a matrix from row-major rows, enforcing the zero diagonal.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows_impl(rows, false)
    }

    /// Builds a matrix whose diagonal may carry self-ratings in `[0, 1]`.
    /// Used by the self-reference studies and the toy scenario.
    pub fn from_rows_with_diagonal(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows_impl(rows, true)
    }

    fn from_rows_impl(rows: Vec<Vec<f64>>, allow_diagonal: bool) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInstance(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    row.len(),
                    n
                )));
            }
        }
        let entries = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        validate_entries(&entries, allow_diagonal)?;
        Ok(Self { n, entries })
    }

    /// Wraps an already-built dense matrix, enforcing the zero diagonal.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        let n = validate_entries(&entries, false)?;
        Ok(Self { n, entries })
    }

    /// Wraps a dense matrix whose diagonal may be nonzero.
    pub fn from_matrix_with_diagonal(entries: DMatrix<f64>) -> Result<Self> {
        let n = validate_entries(&entries, true)?;
        Ok(Self { n, entries })
    }

    /// Returns a copy with every diagonal entry set to `zeta`.
    pub fn with_diagonal(&self, zeta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&zeta) {
            return Err(Error::InvalidInstance(format!(
                "diagonal value {zeta} outside [0,1]"
            )));
        }
        let mut entries = self.entries.clone();
        for i in 0..self.n {
            entries[(i, i)] = zeta;
        }
        Ok(Self {
            n: self.n,
            entries,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.entries[(x, y)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Serializes as CSV, one row per line, shortest round-trip decimals.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for x in 0..self.n {
            for y in 0..self.n {
                if y > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", self.entries[(x, y)]);
            }
            out.push('\n');
        }
        out
    }

    /// Parses the CSV form. The diagonal may be nonzero (round-trips of the
    /// self-reference studies), so only the `[0,1]` range is enforced.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|field| {
                    field.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: idx + 1,
                        message: format!("bad matrix entry {:?}: {e}", field.trim()),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Self::from_rows_with_diagonal(rows)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let rows: Vec<Vec<f64>> = (0..self.n)
            .map(|x| (0..self.n).map(|y| self.entries[(x, y)]).collect())
            .collect();
        Ok(serde_json::to_string(&MatrixJson {
            n: self.n,
            entries: rows,
        })?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let parsed: MatrixJson = serde_json::from_str(text)?;
        if parsed.entries.len() != parsed.n {
            return Err(Error::InvalidInstance(format!(
                "json declares n = {} but has {} rows",
                parsed.n,
                parsed.entries.len()
            )));
        }
        Self::from_rows_with_diagonal(parsed.entries)
    }

    /// Loads from a path, dispatching on the `.json` extension (anything
    /// else is treated as CSV).
    pub fn read_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json_str(&text)
        } else {
            Self::from_csv_str(&text)
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_csv_string())?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json_string()?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonzero_diagonal_in_strict_constructor() {
        let rows = vec![vec![0.1, 0.5], vec![0.5, 0.0]];
        assert!(matches!(
            EvidenceMatrix::from_rows(rows),
            Err(Error::InvalidInstance(_))
        ));
    }

    #[test]
    fn rejects_out_of_range_entries() {
        let rows = vec![vec![0.0, 1.5], vec![0.5, 0.0]];
        assert!(EvidenceMatrix::from_rows(rows).is_err());
        let rows = vec![vec![0.0, -0.1], vec![0.5, 0.0]];
        assert!(EvidenceMatrix::from_rows(rows).is_err());
    }

    #[test]
    fn rejects_single_user() {
        assert!(EvidenceMatrix::from_rows(vec![vec![0.0]]).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let rows = vec![
            vec![0.0, 0.5005, 1.0 / 3.0],
            vec![0.05, 0.0, f64::MIN_POSITIVE],
            vec![0.123456789012345678, 0.9999999999999999, 0.0],
        ];
        let a = EvidenceMatrix::from_rows(rows).unwrap();
        let b = EvidenceMatrix::from_csv_str(&a.to_csv_string()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let rows = vec![vec![0.0, 1.0 / 7.0], vec![0.7, 0.0]];
        let a = EvidenceMatrix::from_rows(rows).unwrap();
        let b = EvidenceMatrix::from_json_str(&a.to_json_string().unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn with_diagonal_sets_every_self_entry() {
        let a = EvidenceMatrix::from_rows(vec![vec![0.0, 0.4], vec![0.6, 0.0]]).unwrap();
        let shifted = a.with_diagonal(1.0).unwrap();
        assert_eq!(shifted.get(0, 0), 1.0);
        assert_eq!(shifted.get(1, 1), 1.0);
        assert_eq!(shifted.get(0, 1), 0.4);
    }

    #[test]
    fn csv_parse_error_carries_line_number() {
        let err = EvidenceMatrix::from_csv_str("0,0.5\n0.5,zero\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
