use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hitting::first_hit;
use crate::kernels::Kernel;
use crate::oracles;
use crate::simulate::Grid;

use super::{check_level, map_paths, Estimate, McConfig};

/// `E V(τ_a)^{-r}`. Censored paths contribute 0; their true contribution is at
/// most `V(t_max)^{-r}`, which bounds the truncation error.
pub fn negative_moment(kernel: &Kernel, a: f64, r: f64, cfg: &McConfig) -> Result<Estimate> {
    cfg.validate()?;
    check_level("a", a)?;
    check_level("r", r)?;
    let plan = cfg.plan(kernel)?;
    let hits: Vec<Option<f64>> = map_paths(cfg, &plan, |path| {
        first_hit(path, a).expect("level validated").tau
    });
    let samples: Vec<f64> = hits
        .iter()
        .map(|h| h.map_or(0.0, |tau| kernel.variance_raw(tau).powf(-r)))
        .collect();
    let censored: Vec<f64> = hits.iter().map(|h| if h.is_none() { 1.0 } else { 0.0 }).collect();
    let censored_count = hits.iter().filter(|h| h.is_none()).count();
    let (frac, frac_se) = crate::stats::mean_stderr(&censored);
    let bound = (frac + frac_se) * kernel.variance_raw(cfg.grid.t_max()).powf(-r);
    Ok(Estimate::from_samples(&samples, censored_count, bound))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSchedule {
    pub r: f64,
    pub horizons: Vec<f64>,
    /// Estimates of `E min(V(τ_a), V(t_max))^r`, one per horizon.
    pub estimates: Vec<Estimate>,
    pub strictly_increasing: bool,
    /// Finite lower bound on `E V(τ_a)^r`, available for `r < 1/2` only.
    pub lower_bound: Option<f64>,
}

/// Truncated positive moments `E min(V(τ_a), V(t_max))^r` along increasing
/// horizons. Censored paths contribute `V(t_max)^r`, so each estimate is
/// exact for its truncated functional. For `r >= 1/2` the untruncated moment
/// is infinite and the estimates must keep growing.
pub fn positive_moment_divergence(
    kernel: &Kernel,
    a: f64,
    r: f64,
    cfg: &McConfig,
    schedule: &[Grid],
) -> Result<MomentSchedule> {
    check_level("a", a)?;
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::invalid(format!("r must lie in (0, 1), got {r}")));
    }
    if schedule.is_empty() {
        return Err(Error::invalid("empty horizon schedule"));
    }
    if schedule.windows(2).any(|w| w[1].t_max() <= w[0].t_max()) {
        return Err(Error::invalid("horizon schedule must be increasing"));
    }
    let mut estimates = Vec::with_capacity(schedule.len());
    for grid in schedule {
        let cfg = cfg.with_grid(*grid);
        cfg.validate()?;
        let plan = cfg.plan(kernel)?;
        let cap = kernel.variance_raw(grid.t_max()).powf(r);
        let hits: Vec<Option<f64>> = map_paths(&cfg, &plan, |path| {
            first_hit(path, a).expect("level validated").tau
        });
        let samples: Vec<f64> = hits
            .iter()
            .map(|h| h.map_or(cap, |tau| kernel.variance_raw(tau).powf(r)))
            .collect();
        let censored = hits.iter().filter(|h| h.is_none()).count();
        estimates.push(Estimate::from_samples(&samples, censored, 0.0));
    }
    let strictly_increasing = estimates.windows(2).all(|w| w[1].mean > w[0].mean);
    let lower_bound = oracles::pos_moment_lower(r, a).ok();
    Ok(MomentSchedule {
        r,
        horizons: schedule.iter().map(|g| g.t_max()).collect(),
        estimates,
        strictly_increasing,
        lower_bound,
    })
}
