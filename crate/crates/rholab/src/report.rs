//! Shared record types for sweeps plus small CSV/JSON emission helpers.

use crate::error::{Error, Result};
use serde::Serialize;
use std::path::Path;

/// One level-set row of a weak-type sweep.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepRow {
    pub t: f64,
    /// uv-measure of the level set at this t.
    pub lhs: f64,
    /// The fixed right-hand integral of the inequality.
    pub rhs: f64,
    /// `t * lhs / rhs` (zero when rhs vanishes).
    pub ratio: f64,
}

impl SweepRow {
    pub fn new(t: f64, lhs: f64, rhs: f64) -> Self {
        let ratio = if rhs > 0.0 { t * lhs / rhs } else { 0.0 };
        SweepRow { t, lhs, rhs, ratio }
    }
}

/// Geometric level ladder `floor * 2^k`, capped at `cap` and at `max_steps`
/// rungs. Always returns at least one rung.
pub fn dyadic_ladder(floor: f64, cap: f64, max_steps: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = floor.max(f64::MIN_POSITIVE);
    for _ in 0..max_steps.max(1) {
        out.push(t);
        t *= 2.0;
        if t > cap {
            break;
        }
    }
    out
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Internal(format!("json: {e}")))?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).unwrap_or_else(|e| format!("{{\"error\":\"{e}\"}}"))
}

/// Write numeric rows as CSV with the given header.
pub fn write_csv_rows(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Internal(format!("csv: {e}")))?;
    w.write_record(header)
        .map_err(|e| Error::Internal(format!("csv: {e}")))?;
    for row in rows {
        let rec: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
        w.write_record(&rec)
            .map_err(|e| Error::Internal(format!("csv: {e}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn sweep_rows_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    write_csv_rows(
        path,
        &["t", "lhs", "rhs", "ratio"],
        &rows
            .iter()
            .map(|r| vec![r.t, r.lhs, r.rhs, r.ratio])
            .collect::<Vec<_>>(),
    )
}
