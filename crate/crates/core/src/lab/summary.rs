use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::elliptic::GridDescriptor;
use crate::probe::DecayTable;
use crate::solver::{DiagnosticsRecord, RunStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

/// One asserted property: `value <relation> tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub tolerance: f64,
    /// signed distance to failure; negative means FAIL
    pub margin: f64,
    pub status: Status,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, tolerance: f64) -> Self {
        let margin = match relation {
            Relation::AtMost | Relation::Below => tolerance - value,
            Relation::AtLeast => value - tolerance,
        };
        let ok = match relation {
            Relation::AtMost => value <= tolerance,
            Relation::Below => value < tolerance,
            Relation::AtLeast => value >= tolerance,
        };
        Check {
            name: name.into(),
            value,
            relation,
            tolerance,
            margin,
            status: if ok { Status::Pass } else { Status::Fail },
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn line(&self) -> String {
        let rel = match self.relation {
            Relation::AtMost => "<=",
            Relation::Below => "<",
            Relation::AtLeast => ">=",
        };
        let status = if self.passed() { "PASS" } else { "FAIL" };
        format!("{status} {} = {:.3e} {rel} {:.3e}", self.name, self.value, self.tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSummary {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub max_residual: f64,
    pub gram_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalitySummary {
    pub s: f64,
    pub worst_name: String,
    pub worst_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub phi: String,
    pub n: usize,
    pub dt: f64,
    pub raw: f64,
    pub regularized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffRow {
    pub k: u32,
    pub one_minus_sq: f64,
    pub gradient_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSeries {
    pub zeta: String,
    pub values: Vec<f64>,
}

/// Everything a run measured. Wall-clock time is deliberately absent so
/// that repeated runs produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub grid: GridDescriptor,
    pub eigen: EigenSummary,
    pub inequalities: Vec<InequalitySummary>,
    pub initial_diagnostics: DiagnosticsRecord,
    pub final_diagnostics: DiagnosticsRecord,
    pub stats: RunStats,
    pub mass_drift: f64,
    pub snapshot_times: Vec<f64>,
    pub decay: DecayTable,
    pub residuals: Vec<ResidualRow>,
    pub cutoffs: Vec<CutoffRow>,
    pub trace_times: Vec<f64>,
    pub initial_trace: Vec<TraceSeries>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl RunSummary {
    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}
