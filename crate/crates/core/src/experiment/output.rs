use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::diagnostics::{DiagnosticsRecord, CSV_COLUMNS};
use crate::error::Result;

/// Time series as CSV text; absent values are empty cells.
pub fn timeseries_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in records {
        let cells: Vec<String> = r.csv_values().iter().map(|v| v.map(|x| format!("{x:e}")).unwrap_or_default()).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn write_timeseries(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    fs::write(path, timeseries_csv(records))?;
    Ok(())
}

/// Parses a time-series CSV back into rows of optional values.
pub fn read_timeseries(text: &str) -> Vec<Vec<Option<f64>>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split(',').map(|c| c.parse().ok()).collect())
        .collect()
}
