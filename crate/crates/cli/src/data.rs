//! Data files: one numeric record per line, scalar or comma-separated
//! vector, UTF-8, `#` comment lines and blank lines ignored.

use std::path::Path;

use crate::error::{CliError, Result};

pub fn read_numeric_file(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for field in trimmed.split(',') {
            let value: f64 = field.trim().parse().map_err(|_| {
                CliError::validation(format!(
                    "{}:{}: cannot parse '{}' as a number",
                    path.display(),
                    lineno + 1,
                    field.trim()
                ))
            })?;
            if !value.is_finite() {
                return Err(CliError::validation(format!(
                    "{}:{}: non-finite value {value}",
                    path.display(),
                    lineno + 1
                )));
            }
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::validation(format!(
            "{}: no numeric records",
            path.display()
        )));
    }
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(CliError::validation(format!(
            "{}: inconsistent record dimensions",
            path.display()
        )));
    }
    Ok(rows)
}

pub fn read_scalar_file(path: &Path) -> Result<Vec<f64>> {
    let rows = read_numeric_file(path)?;
    if rows[0].len() != 1 {
        return Err(CliError::validation(format!(
            "{}: expected scalar records, found dimension {}",
            path.display(),
            rows[0].len()
        )));
    }
    Ok(rows.into_iter().map(|r| r[0]).collect())
}
