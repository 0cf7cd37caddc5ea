use std::path::Path;

use serde::{Deserialize, Serialize};

/// How `measured` is compared with `expected`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// `|measured - expected| <= tolerance`.
    AbsDiff,
    /// `measured <= expected`; `tolerance` repeats the bound.
    AtMost,
    /// `measured >= expected`.
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub check_id: String,
    pub anchor: String,
    #[serde(deserialize_with = "null_as_nan")]
    pub measured: f64,
    #[serde(deserialize_with = "null_as_nan")]
    pub expected: f64,
    #[serde(deserialize_with = "null_as_nan")]
    pub tolerance: f64,
    pub criterion: Criterion,
    pub pass: bool,
}

/// JSON writes non-finite numbers as `null`.
fn null_as_nan<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl Row {
    pub fn close(id: impl Into<String>, anchor: &str, measured: f64, expected: f64, tolerance: f64) -> Self {
        let pass = (measured - expected).abs() <= tolerance;
        Self { check_id: id.into(), anchor: anchor.into(), measured, expected, tolerance, criterion: Criterion::AbsDiff, pass }
    }

    /// A nonnegative defect that must stay below `bound`.
    pub fn at_most(id: impl Into<String>, anchor: &str, measured: f64, bound: f64) -> Self {
        Self { check_id: id.into(), anchor: anchor.into(), measured, expected: bound, tolerance: bound, criterion: Criterion::AtMost, pass: measured <= bound }
    }

    pub fn at_least(id: impl Into<String>, anchor: &str, measured: f64, floor: f64) -> Self {
        Self { check_id: id.into(), anchor: anchor.into(), measured, expected: floor, tolerance: 0.0, criterion: Criterion::AtLeast, pass: measured >= floor }
    }

    pub fn exact(id: impl Into<String>, anchor: &str, measured: f64, expected: f64) -> Self {
        Self::close(id, anchor, measured, expected, 0.0)
    }

    /// A failed computation, kept in the report with a NaN measurement.
    pub fn failed(id: impl Into<String>, anchor: &str, why: &str) -> Self {
        Self {
            check_id: format!("{}: {why}", id.into()),
            anchor: anchor.into(),
            measured: f64::NAN,
            expected: f64::NAN,
            tolerance: f64::NAN,
            criterion: Criterion::AbsDiff,
            pass: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub command: String,
    pub seed: u64,
    pub rows: Vec<Row>,
    pub passed: usize,
    pub failed: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ReportBundle {
    pub fn new(command: &str, seed: u64, rows: Vec<Row>, notes: Vec<String>) -> Self {
        let passed = rows.iter().filter(|r| r.pass).count();
        Self { command: command.into(), seed, failed: rows.len() - passed, passed, rows, notes }
    }

    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> std::io::Result<()> {
        std::fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(self)? + "\n")?;
        write_rows(&dir.join(format!("{stem}.csv")), &self.rows)
    }
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}
