//! Machine-readable run reports.

use std::path::Path;

use edgematch::io::placement_to_json;
use edgematch::{Placement, Vec2};
use serde::{Deserialize, Serialize};

use crate::Method;

/// Bumped whenever a field changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub method: Method,
    pub status: String,
    pub solved: bool,
    /// Relaxation iterations, or solutions found by the brute-force method.
    pub iterations: usize,
    pub objective_history: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbed_at: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rank_ratios: Vec<f64>,
    pub warnings: Vec<String>,
    /// Piece locations per iteration: the preset average under `P` for the
    /// linear program, the first-order moments for the semidefinite one.
    pub trace: Vec<Vec<[f64; 2]>>,
    pub placement: Option<serde_json::Value>,
}

impl RunReport {
    pub fn new(method: Method) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            method,
            status: String::new(),
            solved: false,
            iterations: 0,
            objective_history: Vec::new(),
            perturbed_at: None,
            rank_ratios: Vec::new(),
            warnings: Vec::new(),
            trace: Vec::new(),
            placement: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

pub fn placement_value(placement: &Placement) -> serde_json::Value {
    serde_json::from_str(&placement_to_json(placement)).expect("placement JSON is valid")
}

/// Iteration trace of a solve report; `None` for plain placement files.
pub fn load_trace(path: &Path) -> Option<Vec<Vec<Vec2>>> {
    let report: RunReport = serde_json::from_str(&std::fs::read_to_string(path).ok()?).ok()?;
    Some(
        report
            .trace
            .iter()
            .map(|ts| ts.iter().map(|t| Vec2::new(t[0], t[1])).collect())
            .collect(),
    )
}
