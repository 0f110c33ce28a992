use crate::error::{ensure_finite, Error, Result};
use crate::hitting::{build_profile, HittingProfile, StieltjesIntegrand};
use crate::kernels::Kernel;
use crate::simulate::{self, Path};
use crate::stats::mean_stderr;

use super::{check_level, exp_functional_raw, run_replicates, McConfig, Residual, ResidualDiagnostics};

/// Largest mean per-path truncation bound accepted by the identity estimator.
pub const MAX_IDENTITY_TRUNCATION: f64 = 1e-3;

/// `M_u ∂R/∂s(u, τ)` evaluated along the profile. On a record segment
/// `u = τ_y`; inside an atom `u` runs over `[τ_y, τ_{y+}]` with `τ = τ_y`.
struct IdentityIntegrand<'a> {
    kernel: &'a Kernel,
    path: &'a Path,
    lambda: f64,
}

impl StieltjesIntegrand for IdentityIntegrand<'_> {
    fn on_record(&self, _y: f64, tau: f64) -> f64 {
        exp_functional_raw(self.kernel, self.path, self.lambda, tau) * self.kernel.dcov_ds_raw(tau, tau)
    }

    fn on_jump(&self, _y: f64, z: f64, tau_minus: f64, tau_plus: f64) -> f64 {
        let u = z * tau_plus + (1.0 - z) * tau_minus;
        exp_functional_raw(self.kernel, self.path, self.lambda, u) * self.kernel.dcov_ds_raw(u, tau_minus)
    }
}

#[derive(Clone, Copy, Debug)]
struct Contribution {
    lhs: f64,
    integral: f64,
    censored: bool,
    bound: f64,
}

/// Per-path terms of `∫_0^a M_{τ_y} dy = a - λ ∫_{(0,a]} M ∂R/∂s dτ_y`.
///
/// A path whose maximum `S` stays below `a` is integrated over `(0, S]` plus
/// the open stall at `S` up to `t_max`. The missing part is bounded using
/// `X ≤ a` and `∂R/∂s(u, τ) ≤ V'(u)/2` for `u ≥ τ`, valid for `λ > 0`:
/// `(a - S) e^{λa - λ²V_T/2}` on the left and `e^{λa - λ²V_T/2} / λ` for `λ`
/// times the integral on the right.
fn contribution(kernel: &Kernel, path: &Path, a: f64, lambda: f64) -> Contribution {
    let prof: HittingProfile = build_profile(path);
    let g = IdentityIntegrand { kernel, path, lambda };
    let upper = a.min(prof.s_max);
    let (mut lhs, mut integral) = (0.0, 0.0);
    if upper > 0.0 {
        lhs = prof
            .integrate_dy(upper, |_, tau| exp_functional_raw(kernel, path, lambda, tau))
            .expect("upper within (0, s_max]");
        integral = prof.integrate_dtau(upper, &g).expect("upper within (0, s_max]");
    }
    let censored = prof.s_max < a;
    let mut bound = 0.0;
    if censored {
        if let Some((t0, t1)) = prof.open_stall() {
            integral += HittingProfile::bridge_integral(prof.s_max, t0, t1, &g);
        }
        bound = if lambda > 0.0 {
            let v_t = kernel.variance_raw(path.grid().t_max());
            let e = (lambda * a - 0.5 * lambda * lambda * v_t).exp();
            (a - prof.s_max.max(0.0)) * e + e / lambda
        } else {
            f64::INFINITY
        };
    }
    Contribution {
        lhs,
        integral,
        censored,
        bound,
    }
}

fn check_inputs(kernel: &Kernel, a: f64, lambda: f64, cfg: &McConfig) -> Result<()> {
    cfg.validate()?;
    if !kernel.h1_satisfied() {
        return Err(Error::KernelH1Violated(kernel.to_string()));
    }
    check_level("a", a)?;
    ensure_finite("lambda", lambda)?;
    if lambda == 0.0 {
        return Err(Error::invalid("lambda must be nonzero"));
    }
    Ok(())
}

fn summarize(contribs: &[Contribution], a: f64, lambda: f64, grid_n: usize) -> Result<Residual> {
    let lhs: Vec<f64> = contribs.iter().map(|c| c.lhs).collect();
    let integral: Vec<f64> = contribs.iter().map(|c| c.integral).collect();
    let paired: Vec<f64> = contribs.iter().map(|c| c.lhs + lambda * c.integral).collect();
    let censored_count = contribs.iter().filter(|c| c.censored).count();
    let truncation_bound = contribs.iter().map(|c| c.bound).sum::<f64>() / contribs.len() as f64;
    if !(truncation_bound <= MAX_IDENTITY_TRUNCATION) {
        return Err(Error::CensoringExcess(format!(
            "{censored_count} of {} paths stay below a = {a}; mean truncation bound {truncation_bound:e} exceeds {MAX_IDENTITY_TRUNCATION:e}",
            contribs.len()
        )));
    }
    let (lhs_mean, lhs_se) = mean_stderr(&lhs);
    let (int_mean, int_se) = mean_stderr(&integral);
    let (_, se) = mean_stderr(&paired);
    let rhs = a - lambda * int_mean;
    Ok(Residual {
        lhs: lhs_mean,
        rhs,
        residual: lhs_mean - rhs,
        stderr: se,
        lhs_stderr: lhs_se,
        rhs_stderr: lambda.abs() * int_se,
        diagnostics: ResidualDiagnostics {
            censored_count,
            grid_n,
            replicates: contribs.len(),
            truncation_bound,
        },
        oracle: None,
    })
}

/// Monte Carlo residual of `E ∫_0^a M_{τ_y} dy = a - λ E ∫_{(0,a]} M_u ∂R/∂s(u, τ_u) dτ_u`.
pub fn hitting_identity_residual(kernel: &Kernel, a: f64, lambda: f64, cfg: &McConfig) -> Result<Residual> {
    check_inputs(kernel, a, lambda, cfg)?;
    let plan = cfg.plan(kernel)?;
    let contribs = super::map_paths(cfg, &plan, |path| contribution(kernel, path, a, lambda));
    summarize(&contribs, a, lambda, cfg.grid.n())
}

/// The identity residual on nested grids. Paths are drawn once on
/// `cfg.grid` and decimated by each factor, so every level sees the same
/// Brownian-scale randomness and differences between levels isolate the
/// discretization bias. Results follow the order of `factors`.
pub fn hitting_identity_refinement(
    kernel: &Kernel,
    a: f64,
    lambda: f64,
    cfg: &McConfig,
    factors: &[usize],
) -> Result<Vec<Residual>> {
    check_inputs(kernel, a, lambda, cfg)?;
    if factors.is_empty() {
        return Err(Error::invalid("need at least one coarsening factor"));
    }
    let grids = factors
        .iter()
        .map(|&f| cfg.grid.coarsen(f))
        .collect::<Result<Vec<_>>>()?;
    let plan = cfg.plan(kernel)?;
    let per_path: Vec<Vec<Contribution>> = run_replicates(cfg.workers, cfg.replicates, |rep| {
        let fine = simulate::sample_path(&plan, cfg.master_seed, rep);
        factors
            .iter()
            .map(|&f| {
                let p = fine.coarsen(f).expect("factor validated");
                contribution(kernel, &p, a, lambda)
            })
            .collect()
    });
    grids
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let col: Vec<Contribution> = per_path.iter().map(|row| row[k]).collect();
            summarize(&col, a, lambda, g.n())
        })
        .collect()
}
