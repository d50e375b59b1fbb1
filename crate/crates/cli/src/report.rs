//! `report_v1`: the json schema and its text rendering.

use serde::Serialize;
use serde_json::Value;

use curvedcheck_core::classify::Tolerances;
use curvedcheck_core::DerivativePath;

pub const SCHEMA: &str = "report_v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Informational output, or a suite whose hypotheses do not hold.
    Info,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass | Status::Info => 0,
            Status::Fail => 1,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub summary: String,
}

/// Serialized with sorted keys and without timings, so equal inputs give equal bytes.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivative_path: Option<DerivativePath>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    /// Per-point results, ordered by coordinates.
    pub points: Vec<Value>,
    /// Verb-level checks that are not tied to one point.
    pub checks: Value,
    pub verdict: Verdict,
    #[serde(skip)]
    pub text: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        // round-trip through Value so every map is key-sorted
        let value = serde_json::to_value(self).expect("report serializes");
        serde_json::to_string_pretty(&value).expect("value serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(path) = self.derivative_path {
            out.push_str(&format!("derivatives: {path}\n"));
        }
        for line in &self.text {
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&format!(
            "verdict: {} ({})\n",
            self.verdict.status.label(),
            self.verdict.summary
        ));
        out
    }
}

/// Compact coordinate list for text output.
pub fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|x| format!("{x}")).collect();
    format!("({})", parts.join(", "))
}
