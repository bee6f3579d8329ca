//! JSON report schemas emitted by the command line.

use std::collections::BTreeMap;

use relucert::{CertificationResult, LayerBounds, NormOrder, ObjectiveMargin, UncertaintySet, Verdict};
use serde::{Deserialize, Serialize};

/// How the uncertainty set appears in reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SetSpec {
    Ball { epsilon: f64, norm: String },
    Box { eps_lo: Vec<f64>, eps_hi: Vec<f64> },
}

impl SetSpec {
    pub fn from_set(set: &UncertaintySet) -> SetSpec {
        match set {
            UncertaintySet::Ball { radius, p, .. } => SetSpec::Ball {
                epsilon: *radius,
                norm: norm_name(*p).to_string(),
            },
            UncertaintySet::Box { eps_lo, eps_hi, .. } => SetSpec::Box {
                eps_lo: eps_lo.clone(),
                eps_hi: eps_hi.clone(),
            },
        }
    }
}

pub fn norm_name(p: NormOrder) -> &'static str {
    match p {
        NormOrder::One => "1",
        NormOrder::Two => "2",
        NormOrder::Inf => "inf",
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: f64,
}

/// Report of one `certify` run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    pub network: String,
    pub input: Vec<f64>,
    pub set: SetSpec,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    pub predicted_class: usize,
    pub margins: Vec<ObjectiveMargin>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Vec<f64>>,
    pub timings: Timings,
}

impl RunReport {
    pub fn new(
        network: String,
        input: Vec<f64>,
        set: &UncertaintySet,
        k: Option<usize>,
        mode: Option<String>,
        result: &CertificationResult,
    ) -> RunReport {
        debug_assert!(result.margins.iter().all(|m| m.margin.is_finite()));
        RunReport {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            network,
            input,
            set: SetSpec::from_set(set),
            method: result.method.clone(),
            k,
            mode,
            predicted_class: result.predicted_class,
            margins: result.margins.clone(),
            verdict: result.verdict,
            counterexample: result.counterexample.clone(),
            timings: Timings {
                total_ms: result.wall_time.as_secs_f64() * 1e3,
            },
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.verdict {
            Verdict::Certified => 0,
            Verdict::Unknown => 1,
            Verdict::Falsified => 2,
        }
    }
}

/// Per-method layer bounds emitted by the `bounds` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsEntry {
    pub lower: Vec<Vec<f64>>,
    pub upper: Vec<Vec<f64>>,
}

impl BoundsEntry {
    pub fn from_bounds(b: &LayerBounds) -> BoundsEntry {
        BoundsEntry {
            lower: b.lower.iter().map(|v| v.to_vec()).collect(),
            upper: b.upper.iter().map(|v| v.to_vec()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsReport {
    pub tool_version: String,
    pub network: String,
    pub input: Vec<f64>,
    pub set: SetSpec,
    pub bounds: BTreeMap<String, BoundsEntry>,
    pub timings: Timings,
}
