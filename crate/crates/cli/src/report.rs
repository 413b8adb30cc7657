//! Machine-readable run reports and sweep tables.
//!
//! Reports never embed wall-clock timings: identical configs and seeds must
//! serialize to identical bytes, so timing goes to stderr only.

use cswap_core::estimator::EstimateReport;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Variant};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Exact (closed-form) values for the configured quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactBlock {
    /// The exact value of the quantity the variant estimates or queries.
    pub value: [f64; 2],
    /// Normalizing overlap: Tr[rho_in rho_fin] or Tr[rho SWAP].
    pub overlap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub double_weak_value: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hermitian_observable: Option<bool>,
}

impl ExactBlock {
    pub fn new(value: Complex64, overlap: f64) -> Self {
        ExactBlock {
            value: pair(value),
            overlap,
            double_weak_value: None,
            hermitian_observable: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanBlock {
    pub k_exact: u64,
    pub k_leading: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub x_max: f64,
    pub w_guess: f64,
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoTimeBlock {
    pub swap_overlap: f64,
    pub ppt: bool,
    pub min_eigenvalue_t2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pseudo: Option<[f64; 2]>,
    /// |omega − pseudo|, the signature of the partial transpose.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transpose_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurifyBlock {
    pub overlap_in_fin: f64,
    pub vaidman_overlap: f64,
    pub vaidman_overlap_formula: f64,
    pub double_overlap: f64,
    pub double_overlap_formula: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vaidman_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub double_residual: Option<f64>,
}

/// Full record of one run: the config echo, exact values when computable,
/// the estimate with its bound components, and the toolkit version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub variant: Variant,
    pub config: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<EstimateReport>,
    /// |estimate − exact| when both are present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_time: Option<TwoTimeBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purify: Option<PurifyBlock>,
}

impl RunReport {
    pub fn new(config: ExperimentConfig) -> Self {
        RunReport {
            version: TOOLKIT_VERSION.to_string(),
            variant: config.variant,
            config,
            exact: None,
            estimate: None,
            residual: None,
            plan: None,
            two_time: None,
            purify: None,
        }
    }

    pub fn to_json(&self) -> Result<String, crate::error::CliError> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| crate::error::CliError::Serde(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }
}

/// One row of a sweep table, flat for CSV plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: String,
    pub value: f64,
    pub seed: Option<u64>,
    pub k: Option<u64>,
    pub estimate_re: Option<f64>,
    pub estimate_im: Option<f64>,
    pub exact_re: Option<f64>,
    pub exact_im: Option<f64>,
    pub abs_error: Option<f64>,
    pub mu_hat: Option<f64>,
    pub epsilon_nu: Option<f64>,
    pub epsilon_mu: Option<f64>,
    pub epsilon_total: Option<f64>,
    pub k_planned: Option<u64>,
}

impl SweepRow {
    pub fn from_report(axis: &str, value: f64, report: &RunReport) -> Self {
        let estimate = report.estimate.as_ref();
        let exact = report.exact.as_ref();
        SweepRow {
            axis: axis.to_string(),
            value,
            seed: estimate.map(|e| e.seed).or(report.config.seed),
            k: estimate.map(|e| e.k).or(report.config.k),
            estimate_re: estimate.map(|e| e.estimate.re),
            estimate_im: estimate.map(|e| e.estimate.im),
            exact_re: exact.map(|e| e.value[0]),
            exact_im: exact.map(|e| e.value[1]),
            abs_error: report.residual,
            mu_hat: estimate.map(|e| e.mu_hat),
            epsilon_nu: estimate.and_then(|e| e.epsilon_nu),
            epsilon_mu: estimate.and_then(|e| e.epsilon_mu),
            epsilon_total: estimate.and_then(|e| e.epsilon_total),
            k_planned: report.plan.as_ref().map(|p| p.k_exact),
        }
    }
}

/// Render sweep rows as CSV with a fixed column order.
pub fn sweep_to_csv(rows: &[SweepRow]) -> Result<String, crate::error::CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| crate::error::CliError::Serde(e.to_string()))?;
    }
    // headers are emitted even for an empty sweep
    if rows.is_empty() {
        writer
            .write_record([
                "axis",
                "value",
                "seed",
                "k",
                "estimate_re",
                "estimate_im",
                "exact_re",
                "exact_im",
                "abs_error",
                "mu_hat",
                "epsilon_nu",
                "epsilon_mu",
                "epsilon_total",
                "k_planned",
            ])
            .map_err(|e| crate::error::CliError::Serde(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| crate::error::CliError::Serde(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| crate::error::CliError::Serde(e.to_string()))
}

pub fn sweep_to_json(rows: &[SweepRow]) -> Result<String, crate::error::CliError> {
    let mut text = serde_json::to_string_pretty(rows)
        .map_err(|e| crate::error::CliError::Serde(e.to_string()))?;
    text.push('\n');
    Ok(text)
}
