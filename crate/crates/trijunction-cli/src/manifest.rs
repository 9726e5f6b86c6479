use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;
use std::time::Duration;

use trijunction::solve::SolveReport;

/// Serialized form of a solve report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRecord {
    pub label: String,
    pub method: String,
    pub iterations: usize,
    pub residual: f64,
    pub elapsed_s: f64,
}

impl ReportRecord {
    /// `elapsed` replaces the report's own timing, which the core leaves at 0.
    pub fn new(label: &str, rep: &SolveReport, elapsed: Duration) -> Self {
        ReportRecord {
            label: label.into(),
            method: rep.method.as_str().into(),
            iterations: rep.iterations,
            residual: rep.residual,
            elapsed_s: elapsed.as_secs_f64(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub solver: f64,
    pub rule_beta_max: f64,
    pub rule_tol: f64,
}

/// Written as `manifest.json` next to the command output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub inputs: Value,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub rule_hash: Option<String>,
    /// Whether the rule cache was (re)built by this run.
    pub rule_built: Option<bool>,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
    pub solve_reports: Vec<ReportRecord>,
    pub results: Value,
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
}
