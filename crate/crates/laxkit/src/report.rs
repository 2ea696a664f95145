//! JSON reports shared by every subcommand.

use laxkit_core::{Mat, Q};
use serde::Serialize;
use serde_json::{json, Map, Value};

/// Version of the JSON and CSV output layouts.
pub const SCHEMA_VERSION: u32 = 1;

/// One named check inside a report.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Number of individual cases behind the verdict.
    pub count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, count: usize) -> Self {
        Check { name: name.into(), passed, count, measured: None, tolerance: None, detail: None, counterexample: None }
    }

    /// A toleranced check: passes iff `measured < tolerance` (NaN fails).
    pub fn below(name: impl Into<String>, measured: f64, tolerance: f64, count: usize) -> Self {
        let mut c = Check::new(name, measured < tolerance, count);
        c.measured = Some(measured);
        c.tolerance = Some(tolerance);
        c
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn with_counterexample(mut self, ce: Option<Value>) -> Self {
        self.counterexample = ce;
        self
    }
}

/// Top-level report: `schema_version`, `seed`, `checks[]` plus command-specific fields.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl Report {
    pub fn new(command: impl Into<String>, seed: u64, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Report { schema_version: SCHEMA_VERSION, command: command.into(), seed, passed, checks, extra: Map::new() }
    }

    pub fn with(mut self, key: &str, value: Value) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Exact rationals travel as strings.
pub fn q_json(q: &Q) -> Value {
    Value::String(q.to_string())
}

pub fn mat_json(m: &Mat) -> Value {
    let rows: Vec<Value> = (0..m.rows).map(|i| Value::Array((0..m.cols).map(|j| q_json(&m[(i, j)])).collect())).collect();
    Value::Array(rows)
}

pub fn complex_json(z: laxkit_core::elliptic::C) -> Value {
    json!([z.re, z.im])
}
