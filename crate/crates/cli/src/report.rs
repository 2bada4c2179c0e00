//! The machine-readable report: the analysis plus provenance.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wco_core::analysis::HypothesisFlag;
use wco_core::oracle::WindowReport;
use wco_core::{AnalysisReport, ExtNat, NatSet, NormValue};

pub const TOOL: &str = "wco";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub input_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// The operator in `.wco` syntax.
    pub operator: String,
    pub p: String,
    pub bounded: bool,
    pub fiber_sum_sup: NormValue,
    pub norm: Option<NormValue>,
    pub kernel_dim: ExtNat,
    pub kernel_codim: ExtNat,
    pub multi_fiber_set: NatSet,
    pub range_codim: ExtNat,
    pub closed_range: bool,
    pub fredholm_index: Option<i64>,
    pub hypothesis_flags: Vec<HypothesisFlag>,
    pub oracle: Option<WindowReport>,
    /// Command-specific results (kernel basis, membership, images, …).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl ReportDocument {
    pub fn new(command: &str, input: &str, label: Option<String>, operator: String, p: String, r: AnalysisReport) -> Self {
        ReportDocument {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            input_sha256: sha256_hex(input.as_bytes()),
            label,
            operator,
            p,
            bounded: r.bounded,
            fiber_sum_sup: r.fiber_sum_sup,
            norm: r.norm,
            kernel_dim: r.kernel_dim,
            kernel_codim: r.kernel_codim,
            multi_fiber_set: r.multi_fiber_set,
            range_codim: r.range_codim,
            closed_range: r.closed_range,
            fredholm_index: r.fredholm_index,
            hypothesis_flags: r.hypothesis_flags,
            oracle: None,
            details: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
