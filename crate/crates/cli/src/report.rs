use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;

/// How an observed number is compared with its bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
    Equal,
}

/// One verdict together with the numbers it is derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub observed: Value,
    pub relation: Relation,
    pub bound: Value,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            observed: number(observed),
            relation: Relation::AtMost,
            bound: number(bound),
            pass: observed <= bound,
        }
    }

    pub fn at_least(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            observed: number(observed),
            relation: Relation::AtLeast,
            bound: number(bound),
            pass: observed >= bound,
        }
    }

    pub fn equal(name: impl Into<String>, observed: impl ToString, expected: impl ToString) -> Self {
        let (observed, expected) = (observed.to_string(), expected.to_string());
        Check {
            name: name.into(),
            pass: observed == expected,
            observed: Value::String(observed),
            relation: Relation::Equal,
            bound: Value::String(expected),
        }
    }
}

/// Non-finite values are stored as strings so the report stays valid JSON.
fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(x.to_string()), Value::Number)
}

/// A table written as CSV next to the report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// The deterministic body of a run: everything except timing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub suite: String,
    pub topic: String,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub results: Value,
    /// Set when the suite stopped early; the checks above are the ones completed before.
    pub error: Option<String>,
    pub pass: bool,
}

impl RunReport {
    pub fn new(suite: &str, topic: &str, config: &RunConfig) -> Self {
        RunReport {
            suite: suite.to_string(),
            topic: topic.to_string(),
            config: config.clone(),
            checks: Vec::new(),
            results: Value::Null,
            error: None,
            pass: false,
        }
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Stores a serializable result under `key` of the results object.
    pub fn record(&mut self, key: &str, value: impl Serialize) {
        if !self.results.is_object() {
            self.results = Value::Object(Default::default());
        }
        let value = serde_json::to_value(value).unwrap_or_else(|e| Value::String(format!("unserializable: {e}")));
        self.results
            .as_object_mut()
            .expect("object")
            .insert(key.to_string(), value);
    }

    /// True when there is at least one check, all pass, and the run finished.
    pub fn finish(&mut self) -> bool {
        self.pass = self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.pass);
        self.pass
    }
}

/// Timing and environment, kept apart so the report body is reproducible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunHeader {
    pub suite: String,
    pub version: String,
    pub started_unix: f64,
    pub wall_seconds: f64,
    pub threads: usize,
}

/// Writes `<suite>.report.json`, `<suite>.header.json` and, when given, `<suite>.csv`.
pub fn write_outputs(
    dir: &Path,
    report: &RunReport,
    header: &RunHeader,
    table: Option<&Table>,
) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, text: String| -> std::io::Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, text)?;
        written.push(path);
        Ok(())
    };
    put(format!("{}.report.json", report.suite), pretty(report))?;
    put(format!("{}.header.json", report.suite), pretty(header))?;
    if let Some(table) = table {
        put(format!("{}.csv", report.suite), table.to_csv())?;
    }
    Ok(written)
}

/// Pretty JSON with a trailing newline.
pub fn pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text
}
