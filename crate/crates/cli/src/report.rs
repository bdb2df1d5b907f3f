//! The JSON report. Field order is the serialization order and is stable.

use serde::Serialize;

use crate::request::Restriction;

pub const SCHEMA: &str = "selection-bounds-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Dual,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaggedInterval {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub method: Method,
}

impl TaggedInterval {
    pub fn new(name: &str, interval: selection_bounds::ClosedInterval, method: Method) -> Self {
        // Adding zero turns -0.0 into 0.0.
        TaggedInterval { name: name.to_string(), lo: interval.lo + 0.0, hi: interval.hi + 0.0, method }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

pub fn value(name: &str, value: f64) -> NamedValue {
    NamedValue { name: name.to_string(), value }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Benchmarks {
    /// `[E y_L, E y_U]`.
    pub mean: TaggedInterval,
    pub median: TaggedInterval,
    /// `[P(Y in A), P(Y meets A)]` when a target is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probability: Option<TaggedInterval>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Restricted {
    pub intervals: Vec<TaggedInterval>,
    pub values: Vec<NamedValue>,
    pub notes: Vec<String>,
}

/// Which feasibility inequality failed and by how much.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnosis {
    pub inequality: String,
    pub value: f64,
    pub bound: f64,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub intervals: Vec<TaggedInterval>,
    /// Largest endpoint difference against the matching reported interval.
    pub deltas: Vec<NamedValue>,
    pub tolerance: f64,
    /// `None` when the oracle could not run.
    pub agree: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub mass: f64,
    pub inversion: f64,
    pub oracle_agreement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub source: String,
    pub input_sha256: String,
    pub scenarios: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    pub tolerances: Tolerances,
    /// No randomized checks run, so no seed.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub restriction: Restriction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<[f64; 2]>>,
    pub benchmarks: Benchmarks,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restricted: Option<Restricted>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnosis: Option<Diagnosis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleCheck>,
    pub provenance: Provenance,
}

impl Report {
    pub fn is_infeasible(&self) -> bool {
        self.diagnosis.is_some()
    }

    pub fn oracle_disagrees(&self) -> bool {
        self.oracle.as_ref().is_some_and(|o| o.agree == Some(false))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
