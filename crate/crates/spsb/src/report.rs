//! Deterministic tabular output: fixed-precision number formatting and a
//! small CSV builder. Identical data always serializes to identical bytes,
//! which the verification pipeline relies on.

use crate::error::{Error, Result};

/// Formats a float for CSV cells: '.' decimal separator, scientific
/// notation for small nonzero magnitudes (|x| < 1e−3), fixed nine
/// significant decimals otherwise. NaN and infinities print as `nan`,
/// `inf`, `-inf` (flagged rows, not crashes).
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    if x.abs() < 1e-3 {
        format!("{x:.9e}")
    } else {
        format!("{x:.9}")
    }
}

/// Formats a boolean cell.
pub fn fmt_bool(b: bool) -> String {
    if b { "true".into() } else { "false".into() }
}

/// A rectangular table with a fixed header, serializable to CSV.
#[derive(Clone, Debug)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    /// Creates an empty table with the given column names.
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    /// Appends a row; the cell count must match the header.
    pub fn push_row(&mut self, cells: Vec<String>) -> Result<()> {
        if cells.len() != self.columns.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} cells in a {}-column table",
                cells.len(),
                self.columns.len()
            )));
        }
        self.rows.push(cells);
        Ok(())
    }

    /// Number of data rows.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// True when the table has no data rows.
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Serializes header and rows as comma-separated lines with a trailing
    /// newline.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}
