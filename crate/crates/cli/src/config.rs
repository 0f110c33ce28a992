//! Experiment configuration. Mirrors `schema/config.schema.json`.

use std::path::PathBuf;

use gphit_core::estimators::McConfig;
use gphit_core::oracles::FormulaId;
use gphit_core::simulate::{Grid, SamplerChoice};
use gphit_core::Kernel;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: Kernel,
    pub grid: Grid,
    pub mc: McSection,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, rename = "assert", skip_serializing_if = "Option::is_none")]
    pub assertion: Option<AssertSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub replicates: usize,
    pub master_seed: u64,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default)]
    pub sampler: SamplerChoice,
}

fn one() -> usize {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentKind {
    Negative,
    Positive,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment: Option<MomentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<Grid>>,
    /// Coarsening factors for the identity refinement study.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<usize>>,
    /// Number of paths to dump.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: None,
            formats: default_formats(),
        }
    }
}

fn default_formats() -> Vec<Format> {
    vec![Format::Json]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssertMode {
    /// `|estimate - oracle| <= k_sigma * stderr + bias`
    Equal,
    /// `estimate - k_sigma * stderr <= oracle`
    UpperBound,
    /// `estimate + k_sigma * stderr >= oracle`
    LowerBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssertSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<FormulaId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<AssertMode>,
    #[serde(default = "three")]
    pub k_sigma: f64,
    #[serde(default)]
    pub bias: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_truncation: Option<f64>,
}

fn three() -> f64 {
    3.0
}

impl Default for AssertSpec {
    fn default() -> Self {
        Self {
            oracle: None,
            mode: None,
            k_sigma: 3.0,
            bias: 0.0,
            slope_range: None,
            max_truncation: None,
        }
    }
}

impl ExperimentConfig {
    pub fn mc_config(&self) -> McConfig {
        McConfig {
            replicates: self.mc.replicates,
            master_seed: self.mc.master_seed,
            workers: self.mc.workers,
            grid: self.grid,
            sampler: self.mc.sampler,
        }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}
