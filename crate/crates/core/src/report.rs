//! Structured experiment output.
//!
//! A [`Report`] is plain data: echoed inputs, the schedules used, per-case
//! tables, fitted constants and verdicts. It serializes to JSON with
//! deterministic key order, and each table can be exported as CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Observe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub name: String,
    pub slope: f64,
    pub intercept: f64,
    /// Relative RMS residual of the fit.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Numeric column by name; non-numbers become NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r[j].as_f64().unwrap_or(f64::NAN))
                .collect(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r
                .iter()
                .map(|v| match v {
                    Value::String(t) => t.clone(),
                    Value::Null => String::new(),
                    other => other.to_string(),
                })
                .collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub version: String,
    pub inputs: BTreeMap<String, Value>,
    pub schedules: BTreeMap<String, Value>,
    pub tables: Vec<Table>,
    pub fits: Vec<Fit>,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
    /// Relative paths of artifacts written alongside the report.
    pub files: Vec<String>,
}

impl Report {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: BTreeMap::new(),
            schedules: BTreeMap::new(),
            tables: Vec::new(),
            fits: Vec::new(),
            verdicts: Vec::new(),
            notes: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn input(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.inputs.insert(key.to_string(), value.into());
        self
    }

    pub fn schedule(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.schedules.insert(key.to_string(), value.into());
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn verdict(&mut self, name: &str, status: Status, detail: impl Into<String>) -> &mut Self {
        self.verdicts.push(Verdict {
            name: name.to_string(),
            status,
            detail: detail.into(),
        });
        self
    }

    /// Records a PASS/FAIL verdict from a boolean.
    pub fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) -> &mut Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.verdict(name, status, detail)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn fit(&self, name: &str) -> Option<&Fit> {
        self.fits.iter().find(|f| f.name == name)
    }

    pub fn verdict_of(&self, name: &str) -> Option<Status> {
        self.verdicts.iter().find(|v| v.name == name).map(|v| v.status)
    }

    /// FAIL if any verdict failed, PASS if any passed, OBSERVE otherwise.
    pub fn overall(&self) -> Status {
        if self.verdicts.iter().any(|v| v.status == Status::Fail) {
            Status::Fail
        } else if self.verdicts.iter().any(|v| v.status == Status::Pass) {
            Status::Pass
        } else {
            Status::Observe
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values are serializable")
    }

    /// One line per verdict, for terminal output.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for v in &self.verdicts {
            let tag = match v.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Observe => "OBSERVE",
            };
            let _ = writeln!(s, "[{tag}] {}/{}: {}", self.experiment, v.name, v.detail);
        }
        s
    }
}

/// Number to JSON; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// Least-squares line `y = slope x + intercept` with the RMS residual
/// relative to the RMS of `y`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum::<f64>()
        / n;
    let scale: f64 = y.iter().map(|b| b * b).sum::<f64>() / n;
    (slope, intercept, (res / scale).sqrt())
}
