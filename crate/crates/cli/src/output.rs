//! JSON documents written by the subcommands.
//!
//! Horizons and girths serialize as integers, or as the string `"inf"`.

use dmpest_core::bounds::Girth;
use dmpest_core::Horizon;
use serde::{Serialize, Serializer};

pub fn horizon<S: Serializer>(h: &Horizon, s: S) -> Result<S::Ok, S::Error> {
    match h {
        Horizon::Finite(t) => s.serialize_u32(*t),
        Horizon::Infinite => s.serialize_str("inf"),
    }
}

fn girth<S: Serializer>(g: &Girth, s: S) -> Result<S::Ok, S::Error> {
    match g {
        Girth::Cycle(l) => s.serialize_u32(*l),
        Girth::Acyclic => s.serialize_str("inf"),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Marginals {
    #[serde(serialize_with = "horizon")]
    pub horizon: Horizon,
    pub sigma: f64,
    pub marginals: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateOutput {
    #[serde(serialize_with = "horizon")]
    pub horizon: Horizon,
    pub sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    pub marginals: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<Marginals>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct McOutput {
    pub model: &'static str,
    #[serde(serialize_with = "horizon")]
    pub horizon: Horizon,
    pub runs: u64,
    pub seed: u64,
    pub sigma_mc: f64,
    pub marginals: Vec<f64>,
    pub std_errors: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ArcMessage {
    pub source: String,
    pub target: String,
    pub p: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleOutput {
    #[serde(serialize_with = "horizon")]
    pub horizon: Horizon,
    pub sigma: f64,
    pub marginals: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub messages: Option<Vec<ArcMessage>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareOutput {
    pub model: &'static str,
    #[serde(serialize_with = "horizon")]
    pub horizon: Horizon,
    pub runs: u64,
    pub seed: u64,
    pub delta_p: f64,
    pub sigma_dmp: f64,
    pub sigma_mc: f64,
    /// `max_i (p_mc - p_dmp)`.
    pub max_violation: f64,
    /// Nodes where the MC estimate exceeds the IC estimate by more than
    /// `4 * std_error + 1 / runs`. Always empty for LT.
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertifyOutput {
    #[serde(serialize_with = "girth")]
    pub girth: Girth,
    #[serde(serialize_with = "horizon")]
    pub horizon: Horizon,
    pub exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BracketOutput {
    #[serde(serialize_with = "horizon")]
    pub horizon: Horizon,
    pub strategy: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRecord {
    pub nodes: usize,
    pub arcs: usize,
    pub horizon: u32,
    pub wall_time_seconds: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchOutput {
    pub family: String,
    pub horizon: u32,
    pub repetitions: usize,
    pub records: Vec<BenchRecord>,
    /// Least-squares slope of `ln(time)` against `ln(N)`; absent for one size.
    pub slope: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AccuracyRecord {
    pub graph: String,
    pub nodes: usize,
    pub edges: usize,
    pub horizon: u32,
    pub runs: u64,
    pub seed: u64,
    pub delta_p: f64,
    pub sigma_dmp: f64,
    pub sigma_mc: f64,
    pub dmp_runtime: f64,
    pub mc_runtime: f64,
}
