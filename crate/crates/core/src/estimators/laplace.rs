use crate::error::{Error, Result};
use crate::hitting::first_hit;
use crate::kernels::Kernel;

use super::{check_level, map_paths, Estimate, McConfig};

/// `E exp(-α V(τ_a))`. Paths that stay below `a` up to `t_max` contribute 0;
/// their true contribution lies in `[0, e^{-α V(t_max)}]`, which gives the
/// reported truncation bound.
pub fn laplace_hitting(kernel: &Kernel, a: f64, alpha: f64, cfg: &McConfig) -> Result<Estimate> {
    let mut grid = laplace_hitting_grid(kernel, &[a], &[alpha], cfg)?;
    Ok(grid.remove(0).remove(0))
}

/// Every `(level, alpha)` cell from one shared path set; indexed
/// `[level][alpha]`.
pub fn laplace_hitting_grid(
    kernel: &Kernel,
    levels: &[f64],
    alphas: &[f64],
    cfg: &McConfig,
) -> Result<Vec<Vec<Estimate>>> {
    cfg.validate()?;
    if levels.is_empty() || alphas.is_empty() {
        return Err(Error::invalid("need at least one level and one alpha"));
    }
    for &a in levels {
        check_level("a", a)?;
    }
    for &alpha in alphas {
        check_level("alpha", alpha)?;
    }
    let plan = cfg.plan(kernel)?;
    let variances: Vec<Vec<Option<f64>>> = map_paths(cfg, &plan, |path| {
        levels
            .iter()
            .map(|&a| {
                let hit = first_hit(path, a).expect("level validated");
                hit.tau.map(|tau| kernel.variance_raw(tau))
            })
            .collect()
    });
    let v_max = kernel.variance_raw(cfg.grid.t_max());
    let n = cfg.replicates;
    let mut out = Vec::with_capacity(levels.len());
    for li in 0..levels.len() {
        let censored: Vec<f64> = variances
            .iter()
            .map(|row| if row[li].is_none() { 1.0 } else { 0.0 })
            .collect();
        let censored_count = censored.iter().filter(|&&c| c > 0.0).count();
        let (frac, frac_se) = crate::stats::mean_stderr(&censored);
        let mut row = Vec::with_capacity(alphas.len());
        for &alpha in alphas {
            let samples: Vec<f64> = variances
                .iter()
                .map(|r| r[li].map_or(0.0, |v| (-alpha * v).exp()))
                .collect();
            let bound = (frac + frac_se) * (-alpha * v_max).exp();
            let est = Estimate::from_samples(&samples, censored_count, bound);
            debug_assert_eq!(est.replicates, n);
            row.push(est);
        }
        out.push(row);
    }
    Ok(out)
}
