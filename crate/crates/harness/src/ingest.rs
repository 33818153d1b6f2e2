//! Header-free, comma-separated numeric files.

use std::path::Path;

use lar_core::{DesignMatrix, ResponseVector};

use crate::error::{HarnessError, Result};

fn ingest_err(path: &Path, message: impl Into<String>) -> HarnessError {
    HarnessError::Ingest {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Rows of a rectangular numeric CSV.
pub fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| ingest_err(path, e.to_string()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ingest_err(path, e.to_string()))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(c, s)| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| ingest_err(path, format!("line {}, field {}: not a finite number: {s:?}", line + 1, c + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(ingest_err(path, format!("line {} has {} fields, expected {}", line + 1, row.len(), first.len())));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(ingest_err(path, "file is empty"));
    }
    Ok(rows)
}

/// `n` rows by `p` columns, row-major on disk; optionally scaled to unit-norm columns.
pub fn read_design(path: &Path, normalize: bool) -> Result<DesignMatrix> {
    let rows = read_rows(path)?;
    let (n, p) = (rows.len(), rows[0].len());
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let mut design = DesignMatrix::from_row_major(n, p, &flat).map_err(|e| ingest_err(path, e.to_string()))?;
    if normalize {
        design.normalize_columns().map_err(|e| ingest_err(path, e.to_string()))?;
    }
    Ok(design)
}

/// A single column of `n` values.
pub fn read_response(path: &Path) -> Result<ResponseVector> {
    let rows = read_rows(path)?;
    if rows[0].len() != 1 {
        return Err(ingest_err(path, format!("response needs one column, found {}", rows[0].len())));
    }
    ResponseVector::new(rows.into_iter().map(|r| r[0]).collect()).map_err(|e| ingest_err(path, e.to_string()))
}
