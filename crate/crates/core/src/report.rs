//! Structured experiment reports: line-oriented JSON records, with a CSV
//! projection of the per-scale table.

use serde::{Deserialize, Serialize};

use crate::estimator::{EstimatorConfig, KEstimate};

/// Echo of everything needed to reproduce a run bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: String,
    pub horizon: u64,
    pub seed: u64,
    /// Present only for non-blind runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_true: Option<u32>,
    pub estimator: EstimatorConfig,
}

/// One run's full record: config echo, estimate, per-scale rows and
/// diagnostics (inside the estimate), and optional wall time.
///
/// Wall time is opt-in so that default reports stay byte-identical across
/// reruns of the same inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: RunConfig,
    pub estimate: KEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

impl ExperimentReport {
    /// Single-line JSON record.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }

    pub fn from_json_line(line: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(line)
    }

    /// CSV projection of the per-scale table.
    pub fn scale_table_csv(&self) -> String {
        let mut out = String::from("scale,median,y_tilde,e_single,ratio\n");
        for s in &self.estimate.scales {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.scale, s.median, s.y_tilde, s.e_single, s.ratio
            ));
        }
        out
    }
}
