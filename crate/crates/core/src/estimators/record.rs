//! JSON records emitted by the estimators.

use serde::Serialize;
use serde_json::Value;

use crate::kernels::Kernel;
use crate::oracles::OracleValue;
use crate::simulate::Grid;

use super::{Estimate, McConfig, Residual};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimatorRecord {
    pub estimator: String,
    pub kernel: Kernel,
    pub params: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    pub stderr: f64,
    pub replicates: usize,
    pub censored: usize,
    pub truncation_bound: f64,
    pub seed: u64,
    pub grid: Grid,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleValue>,
}

impl EstimatorRecord {
    pub fn from_estimate(estimator: &str, kernel: &Kernel, params: Value, cfg: &McConfig, e: &Estimate) -> Self {
        Self {
            estimator: estimator.to_string(),
            kernel: *kernel,
            params,
            mean: Some(e.mean),
            lhs: None,
            rhs: None,
            residual: None,
            stderr: e.stderr,
            replicates: e.replicates,
            censored: e.censored_count,
            truncation_bound: e.truncation_bound,
            seed: cfg.master_seed,
            grid: cfg.grid,
            oracle: None,
        }
    }

    pub fn from_residual(estimator: &str, kernel: &Kernel, params: Value, cfg: &McConfig, r: &Residual) -> Self {
        Self {
            estimator: estimator.to_string(),
            kernel: *kernel,
            params,
            mean: None,
            lhs: Some(r.lhs),
            rhs: Some(r.rhs),
            residual: Some(r.residual),
            stderr: r.stderr,
            replicates: r.diagnostics.replicates,
            censored: r.diagnostics.censored_count,
            truncation_bound: r.diagnostics.truncation_bound,
            seed: cfg.master_seed,
            grid: cfg.grid,
            oracle: r.oracle,
        }
    }

    pub fn with_oracle(mut self, oracle: OracleValue) -> Self {
        self.oracle = Some(oracle);
        self
    }
}
