use serde::Serialize;
use std::fmt;

/// Error reported by the command line, keeping the core's provenance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CliError {
    pub kind: String,
    /// Module or operation that raised the error.
    pub op: String,
    pub detail: String,
}

impl CliError {
    pub fn new(kind: &str, op: &str, detail: impl Into<String>) -> Self {
        CliError { kind: kind.into(), op: op.into(), detail: detail.into() }
    }

    /// `{"error": {...}}` as written on failure.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error in {}: {}", self.kind, self.op, self.detail)
    }
}

impl std::error::Error for CliError {}

impl From<trijunction::Error> for CliError {
    fn from(e: trijunction::Error) -> Self {
        CliError::new(e.kind.as_str(), e.op, e.detail)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new("io", "cli", e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::new("io", "csv", e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::new("parse", "json", e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
