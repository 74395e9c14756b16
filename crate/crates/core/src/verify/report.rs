use serde::Serialize;
use serde_json::Value;

/// Version tag embedded in every report.
pub fn git_describe() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

/// The report written by every suite run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub params: Value,
    pub expected: Value,
    pub fitted: Value,
    pub tolerance: f64,
    pub pass: bool,
    pub seeds: Vec<u64>,
    pub git_describe: String,
}

impl Report {
    pub fn new(suite: impl Into<String>, params: Value, expected: Value, fitted: Value, tolerance: f64, pass: bool, seeds: Vec<u64>) -> Self {
        Report {
            suite: suite.into(),
            params,
            expected,
            fitted,
            tolerance,
            pass,
            seeds,
            git_describe: git_describe(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}
