use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hitting::first_hit;
use crate::kernels::Kernel;
use crate::stats::ols;

use super::{check_level, map_paths, McConfig};

/// Probes with fewer surviving paths are left out of the fit.
pub const MIN_SURVIVORS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub t: f64,
    /// Fraction of paths with `S_t < a`.
    pub survival: f64,
    pub stderr: f64,
    pub survivors: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// OLS slope of `ln P(S_t < a)` against `ln t`.
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    /// Probes used in the fit.
    pub points: Vec<TailPoint>,
    /// Probes dropped for having fewer than [`MIN_SURVIVORS`] survivors.
    pub dropped: Vec<TailPoint>,
    pub replicates: usize,
}

/// Log-log fit of the survival probability `P(S_t < a)` over `probes`.
///
/// `S_t < a` holds exactly when the first crossing of `a` is later than `t`,
/// so one first-passage time per path serves every probe.
pub fn tail_exponent(kernel: &Kernel, a: f64, probes: &[f64], cfg: &McConfig) -> Result<TailFit> {
    cfg.validate()?;
    check_level("a", a)?;
    let t_max = cfg.grid.t_max();
    if probes.len() < 4 {
        return Err(Error::invalid(format!("need at least 4 probes, got {}", probes.len())));
    }
    if probes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("probes must be strictly increasing"));
    }
    if !(probes[0] > 0.0 && probes[probes.len() - 1] <= t_max * (1.0 + 1e-12)) {
        return Err(Error::invalid(format!("probes must lie in (0, {t_max}]")));
    }
    if probes[probes.len() - 1] / probes[0] < 100.0 {
        return Err(Error::invalid("probes must span at least two decades"));
    }
    let plan = cfg.plan(kernel)?;
    let taus: Vec<Option<f64>> = map_paths(cfg, &plan, |path| {
        first_hit(path, a).expect("level validated").tau
    });
    let n = taus.len() as f64;
    let mut points = Vec::new();
    let mut dropped = Vec::new();
    for &t in probes {
        let survivors = taus.iter().filter(|tau| tau.is_none_or(|tau| tau > t)).count();
        let p = survivors as f64 / n;
        let point = TailPoint {
            t,
            survival: p,
            stderr: (p * (1.0 - p) / n).sqrt(),
            survivors,
        };
        if survivors < MIN_SURVIVORS {
            dropped.push(point);
        } else {
            points.push(point);
        }
    }
    if points.len() < 4 {
        return Err(Error::TooFewProbes { remaining: points.len() });
    }
    let x: Vec<f64> = points.iter().map(|p| p.t.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.survival.ln()).collect();
    let fit = ols(&x, &y);
    Ok(TailFit {
        slope: fit.slope,
        slope_stderr: fit.slope_stderr,
        intercept: fit.intercept,
        points,
        dropped,
        replicates: taus.len(),
    })
}

/// `count` log-spaced probes from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == count {
                hi
            } else {
                (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}
