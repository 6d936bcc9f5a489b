// SPDX-License-Identifier: MIT OR Apache-2.0

//! The machine-readable result of a scan.
//!
//! Serialized field order is fixed so that identical runs produce
//! byte-identical JSON. `runtime_ms` is only filled in on request for the
//! same reason.

use serde::{Deserialize, Serialize};

use crate::edge_stats::{EdgeCountProfile, ScanProcesses, Window};
use crate::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputInfo {
    pub n: usize,
    /// Absent when the scan ran on a supplied graph.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub k: usize,
    pub eps: f64,
    pub n0: usize,
    pub n1: usize,
    pub alpha: f64,
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Offset of the scanned rows within the full input, for intervals
    /// tested during segmentation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub tested: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_hat: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_stat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_analytic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_perm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reject: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub skipped_t: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degenerate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

/// One line of the per-t trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub t: usize,
    pub r1: u64,
    pub r2: u64,
    pub z_w: f64,
    pub z_diff: f64,
    pub m: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Traces {
    rows: Vec<TraceRow>,
}

impl Traces {
    pub fn new(profile: &EdgeCountProfile, scan: &ScanProcesses) -> Self {
        let rows = scan
            .window
            .iter()
            .map(|t| {
                let (z_w, z_diff, m) = scan.at(t);
                TraceRow {
                    t,
                    r1: profile.r1(t),
                    r2: profile.r2(t),
                    z_w,
                    z_diff,
                    m,
                }
            })
            .collect();
        Self { rows }
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub schema_version: u32,
    pub input: InputInfo,
    pub params: Params,
    pub result: ScanResult,
    pub diagnostics: Diagnostics,
    #[serde(skip)]
    pub traces: Option<Traces>,
}

impl ScanReport {
    pub fn new(input: InputInfo, params: Params) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            input,
            params,
            result: ScanResult::default(),
            diagnostics: Diagnostics::default(),
            traces: None,
        }
    }

    pub fn window(&self) -> Window {
        Window::new(self.params.n0, self.params.n1)
    }

    /// A report for a scan that could not run, with the reason.
    pub fn untested(mut self, reason: impl Into<String>) -> Self {
        self.result = ScanResult {
            tested: false,
            reason: Some(reason.into()),
            ..ScanResult::default()
        };
        self
    }

    pub fn tau_hat(&self) -> Option<usize> {
        self.result.tau_hat
    }

    /// The p-value used for the decision: permutation when present,
    /// otherwise analytic.
    pub fn p_value(&self) -> Option<f64> {
        self.result.p_perm.or(self.result.p_analytic)
    }

    pub fn rejected(&self) -> bool {
        self.result.reject.unwrap_or(false)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Formats a p-value for people: three decimals, `<0.001` below that.
pub fn format_p(p: f64) -> String {
    if p < 1e-3 {
        "<0.001".to_string()
    } else {
        format!("{p:.3}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ScanReport {
        ScanReport::new(
            InputInfo { n: 598, d: Some(3) },
            Params {
                k: 5,
                eps: 0.0,
                n0: 30,
                n1: 568,
                alpha: 0.05,
                mode: "analytic".into(),
                replicates: None,
                seed: None,
                offset: None,
            },
        )
    }

    #[test]
    fn tau_hat_serializes_compactly() {
        let mut r = sample();
        r.result = ScanResult {
            tested: true,
            tau_hat: Some(437),
            max_stat: Some(9.5),
            p_analytic: Some(1e-9),
            reject: Some(true),
            ..ScanResult::default()
        };
        let s = r.to_json_string().unwrap();
        assert!(s.contains("\"tau_hat\":437"), "{s}");
        assert!(!s.contains("runtime_ms"));
    }

    #[test]
    fn untested_report_carries_reason() {
        let s = sample().untested("empty window").to_json_string().unwrap();
        assert!(s.contains("\"tested\":false"));
        assert!(s.contains("\"reason\":\"empty window\""));
    }

    #[test]
    fn permutation_p_round_trips() {
        let mut r = sample();
        r.result.tested = true;
        r.result.p_perm = Some(0.051);
        let s = r.to_json_string().unwrap();
        assert!(s.contains("\"p_perm\":0.051"));
        assert_eq!(ScanReport::from_json_str(&s).unwrap(), r);
    }

    #[test]
    fn small_p_values_print_as_bound() {
        assert_eq!(format_p(0.0004), "<0.001");
        assert_eq!(format_p(0.0512), "0.051");
    }
}
