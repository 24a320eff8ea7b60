//! End-to-end experiments built from the kernels, distances and trig sums.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::trig_sums::BoundReport;

pub mod algorithm1;
pub mod coordinate;
pub mod fig1;
pub mod theorem3;

pub use algorithm1::{algorithm1_run, Algorithm1Mode};
pub use coordinate::{coordinate_wise_run, two_thirds_mass, MassReport, RoundPolicy};
pub use fig1::fig1_experiment;
pub use theorem3::{theorem3_case_check, theorem3_horizon, Theorem3Outcome};

/// Result of one experiment run. Everything except `wall_clock` is a pure
/// function of the configuration, so serialized records are reproducible.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub name: String,
    pub config: serde_json::Value,
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub values: BTreeMap<String, f64>,
    pub bounds: Vec<BoundReport>,
    pub verdicts: BTreeMap<String, bool>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub wall_clock: Option<Duration>,
}

impl ExperimentRecord {
    pub fn new(name: impl Into<String>, config: serde_json::Value) -> Self {
        Self {
            name: name.into(),
            config,
            ..Self::default()
        }
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    /// True when every bound is satisfied and every verdict holds.
    pub fn passed(&self) -> bool {
        self.bounds.iter().all(|b| b.satisfied) && self.verdicts.values().all(|&v| v)
    }
}
