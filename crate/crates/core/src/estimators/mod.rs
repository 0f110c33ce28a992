//! Monte Carlo estimators of hitting-time functionals.
//!
//! Every estimator draws replicate `i` from the stream `(master_seed, i)`,
//! evaluates a per-replicate contribution, stores it at index `i`, and only
//! then reduces the buffer in index order. Results are therefore bitwise
//! identical for any worker count.

mod ibp;
mod identity;
mod laplace;
mod moments;
pub mod record;
mod tail;

pub use ibp::ibp_residual;
pub use identity::{hitting_identity_residual, hitting_identity_refinement, MAX_IDENTITY_TRUNCATION};
pub use laplace::{laplace_hitting, laplace_hitting_grid};
pub use moments::{negative_moment, positive_moment_divergence, MomentSchedule};
pub use tail::{log_spaced, tail_exponent, TailFit, TailPoint, MIN_SURVIVORS};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::kernels::Kernel;
use crate::oracles::OracleValue;
use crate::simulate::{self, Grid, Path, SamplerChoice, SamplerPlan};
use crate::stats::mean_stderr;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub replicates: usize,
    pub master_seed: u64,
    pub workers: usize,
    pub grid: Grid,
    #[serde(default)]
    pub sampler: SamplerChoice,
}

impl McConfig {
    pub fn new(replicates: usize, master_seed: u64, grid: Grid) -> Self {
        Self {
            replicates,
            master_seed,
            workers: 1,
            grid,
            sampler: SamplerChoice::Auto,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_sampler(mut self, sampler: SamplerChoice) -> Self {
        self.sampler = sampler;
        self
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    pub fn with_grid(mut self, grid: Grid) -> Self {
        self.grid = grid;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::invalid(format!("need at least 2 replicates, got {}", self.replicates)));
        }
        if self.workers < 1 {
            return Err(Error::invalid("workers must be >= 1"));
        }
        Ok(())
    }

    pub(crate) fn plan(&self, kernel: &Kernel) -> Result<SamplerPlan> {
        simulate::plan(kernel, &self.grid, self.sampler)
    }
}

/// Monte Carlo point estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub replicates: usize,
    pub censored_count: usize,
    /// Upper bound on the bias contributed by paths that did not reach the
    /// level within the horizon.
    pub truncation_bound: f64,
}

impl Estimate {
    pub(crate) fn from_samples(samples: &[f64], censored_count: usize, truncation_bound: f64) -> Self {
        let (mean, stderr) = mean_stderr(samples);
        Self {
            mean,
            stderr,
            replicates: samples.len(),
            censored_count,
            truncation_bound,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualDiagnostics {
    pub censored_count: usize,
    pub grid_n: usize,
    pub replicates: usize,
    pub truncation_bound: f64,
}

/// Both sides of an identity with their paired difference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub lhs: f64,
    pub rhs: f64,
    /// Always exactly `lhs - rhs`.
    pub residual: f64,
    /// Standard error of the residual from paired per-replicate differences.
    pub stderr: f64,
    pub lhs_stderr: f64,
    pub rhs_stderr: f64,
    pub diagnostics: ResidualDiagnostics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleValue>,
}

/// Evaluates `f(i)` for every replicate on a pool of `workers` threads and
/// returns the results in replicate order.
pub(crate) fn run_replicates<T, F>(workers: usize, replicates: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    if workers <= 1 {
        return (0..replicates as u64).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("failed to build worker pool");
    pool.install(|| (0..replicates as u64).into_par_iter().map(f).collect())
}

/// Draws every replicate path of `plan` and maps it through `f`.
pub(crate) fn map_paths<T, F>(cfg: &McConfig, plan: &SamplerPlan, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&Path) -> T + Sync + Send,
{
    run_replicates(cfg.workers, cfg.replicates, |rep| {
        let path = simulate::sample_path(plan, cfg.master_seed, rep);
        f(&path)
    })
}

#[inline]
pub(crate) fn exp_functional_raw(kernel: &Kernel, path: &Path, lambda: f64, t: f64) -> f64 {
    (lambda * path.value_at(t) - 0.5 * lambda * lambda * kernel.variance_raw(t)).exp()
}

/// `M_t = exp(λ X_t - λ² V_t / 2)` with `X_t` from the interpolated path and
/// `V_t` from the kernel.
pub fn exponential_functional(kernel: &Kernel, path: &Path, lambda: f64, t: f64) -> Result<f64> {
    ensure_finite("lambda", lambda)?;
    if !(t >= 0.0 && t <= path.grid().t_max()) {
        return Err(Error::invalid(format!(
            "t = {t} outside [0, {}]",
            path.grid().t_max()
        )));
    }
    Ok(exp_functional_raw(kernel, path, lambda, t))
}

/// `(M_t - 1) / λ`, the extended divergence of `M 1_[0,t]`.
pub fn divergence_integral(kernel: &Kernel, path: &Path, lambda: f64, t: f64) -> Result<f64> {
    if lambda == 0.0 {
        return Err(Error::invalid("lambda must be nonzero"));
    }
    Ok((exponential_functional(kernel, path, lambda, t)? - 1.0) / lambda)
}

pub(crate) fn check_level(name: &str, v: f64) -> Result<()> {
    crate::error::ensure_positive(name, v)
}
