//! One function per subcommand. Each returns the JSON result, the assertion
//! checks it supports, and any CSV tables to write.

use std::fmt::Write as _;

use gphit_core::estimators::{
    self, hitting_identity_refinement, hitting_identity_residual, ibp_residual, laplace_hitting,
    negative_moment, positive_moment_divergence, record::EstimatorRecord, tail_exponent, Estimate,
};
use gphit_core::kernels::Family;
use gphit_core::oracles::{self, FormulaId, OracleValue};
use gphit_core::simulate::{self, Grid};
use gphit_core::{Error, Kernel};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{AssertMode, AssertSpec, ExperimentConfig, MomentKind};

#[derive(Debug)]
pub enum Failure {
    /// Bad or incomplete configuration, or a failed write.
    Config(String),
    /// Planner failures, censoring excess and other numerical breakdowns.
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            passed: value <= limit,
        }
    }

    fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            passed: value >= limit,
        }
    }

    fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: ok as u8 as f64,
            limit: 1.0,
            passed: ok,
        }
    }
}

pub struct Outcome {
    pub result: Value,
    pub checks: Vec<Check>,
    pub tables: Vec<(String, String)>,
}

fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Config(format!("missing params.{name}")))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// Compares an estimate with an oracle value under the configured mode.
fn oracle_checks(spec: &AssertSpec, default_mode: AssertMode, mean: f64, stderr: f64, oracle: f64) -> Vec<Check> {
    let k = spec.k_sigma;
    match spec.mode.unwrap_or(default_mode) {
        AssertMode::Equal => vec![Check::at_most(
            "abs(estimate - oracle)",
            (mean - oracle).abs(),
            k * stderr + spec.bias,
        )],
        AssertMode::UpperBound => vec![Check::at_most("estimate - k_sigma*stderr", mean - k * stderr, oracle + spec.bias)],
        AssertMode::LowerBound => vec![Check::at_least("estimate + k_sigma*stderr", mean + k * stderr, oracle - spec.bias)],
    }
}

fn truncation_check(spec: &AssertSpec, bound: f64) -> Option<Check> {
    spec.max_truncation
        .map(|m| Check::at_most("truncation_bound", bound, m))
}

pub fn paths(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let count = cfg.params.count.unwrap_or(1);
    if count == 0 {
        return Err(Failure::Config("params.count must be positive".into()));
    }
    let plan = simulate::plan(&cfg.kernel, &cfg.grid, cfg.mc.sampler)?;
    let mut rows = Vec::with_capacity(count);
    let mut tables = Vec::new();
    for rep in 0..count as u64 {
        let path = simulate::sample_path(&plan, cfg.mc.master_seed, rep);
        let v = path.values();
        rows.push(json!({
            "replicate": rep,
            "final": v[v.len() - 1],
            "max": v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }));
        let mut buf = Vec::new();
        path.write_csv(&mut buf).expect("in-memory write");
        tables.push((format!("path_{rep}.csv"), String::from_utf8(buf).expect("ascii")));
    }
    let jitter = plan.jitter_applied();
    Ok(Outcome {
        result: json!({
            "method": plan.method().name(),
            "jitter_applied": jitter,
            "embedding_size": plan.embedding_size(),
            "paths": rows,
        }),
        checks: vec![Check::at_most("jitter_applied", jitter, 0.0)],
        tables,
    })
}

fn default_laplace_oracle(kernel: &Kernel) -> (FormulaId, AssertMode) {
    match kernel.family() {
        Family::StandardBrownian => (FormulaId::BmLaplace, AssertMode::Equal),
        Family::Linear => (FormulaId::LinearLaplace, AssertMode::Equal),
        Family::IndependentIncrements => (FormulaId::IndepIncrLaplace, AssertMode::Equal),
        Family::FractionalBrownian => match kernel.hurst() {
            Some(h) if h == 0.5 => (FormulaId::BmLaplace, AssertMode::Equal),
            Some(h) if h == 1.0 => (FormulaId::LinearLaplace, AssertMode::Equal),
            _ => (FormulaId::BmLaplace, AssertMode::UpperBound),
        },
    }
}

pub fn laplace(cfg: &ExperimentConfig, spec: &AssertSpec) -> Result<Outcome, Failure> {
    let a = need(cfg.params.a, "a")?;
    let alpha = need(cfg.params.alpha, "alpha")?;
    let mc = cfg.mc_config();
    let e = laplace_hitting(&cfg.kernel, a, alpha, &mc)?;
    let (default_id, default_mode) = default_laplace_oracle(&cfg.kernel);
    let id = spec.oracle.unwrap_or(default_id);
    let value = match id {
        FormulaId::BmLaplace => oracles::bm_laplace(a, alpha),
        FormulaId::LinearLaplace => oracles::linear_laplace(a, alpha),
        FormulaId::IndepIncrLaplace => oracles::indep_incr_laplace(a, (2.0 * alpha).sqrt()),
        other => return Err(Failure::Config(format!("oracle {other:?} does not apply to laplace"))),
    };
    let oracle = OracleValue::new(value, id);
    let mode = if spec.oracle.is_some() && spec.oracle != Some(default_id) {
        AssertMode::Equal
    } else {
        default_mode
    };
    let mut checks = oracle_checks(spec, mode, e.mean, e.stderr, value);
    checks.extend(truncation_check(spec, e.truncation_bound));
    let rec = EstimatorRecord::from_estimate("laplace_hitting", &cfg.kernel, json!({"a": a, "alpha": alpha}), &mc, &e)
        .with_oracle(oracle);
    Ok(Outcome {
        result: to_value(&rec),
        checks,
        tables: Vec::new(),
    })
}

pub fn identity(cfg: &ExperimentConfig, spec: &AssertSpec) -> Result<Outcome, Failure> {
    let a = need(cfg.params.a, "a")?;
    let lambda = need(cfg.params.lambda, "lambda")?;
    let mc = cfg.mc_config();
    let params = json!({"a": a, "lambda": lambda});
    match &cfg.params.factors {
        None => {
            let r = hitting_identity_residual(&cfg.kernel, a, lambda, &mc)?;
            let mut checks = vec![Check::at_most(
                "abs(residual)",
                r.residual.abs(),
                spec.k_sigma * r.stderr + spec.bias,
            )];
            checks.extend(truncation_check(spec, r.diagnostics.truncation_bound));
            let rec = EstimatorRecord::from_residual("hitting_identity_residual", &cfg.kernel, params, &mc, &r);
            Ok(Outcome {
                result: to_value(&rec),
                checks,
                tables: Vec::new(),
            })
        }
        Some(factors) => {
            let levels = hitting_identity_refinement(&cfg.kernel, a, lambda, &mc, factors)?;
            let mut checks = Vec::new();
            let mut csv = String::from("n,lhs,rhs,residual,stderr\n");
            for r in &levels {
                checks.push(Check::at_most(
                    format!("abs(residual) at n={}", r.diagnostics.grid_n),
                    r.residual.abs(),
                    spec.k_sigma * r.stderr + spec.bias,
                ));
                writeln!(
                    csv,
                    "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                    r.diagnostics.grid_n, r.lhs, r.rhs, r.residual, r.stderr
                )
                .unwrap();
            }
            Ok(Outcome {
                result: json!({
                    "estimator": "hitting_identity_refinement",
                    "kernel": cfg.kernel,
                    "params": params,
                    "factors": factors,
                    "levels": levels,
                    "seed": mc.master_seed,
                }),
                checks,
                tables: vec![("identity_refinement.csv".into(), csv)],
            })
        }
    }
}

pub fn ibp(cfg: &ExperimentConfig, spec: &AssertSpec) -> Result<Outcome, Failure> {
    let t = need(cfg.params.t, "t")?;
    let t1 = need(cfg.params.t1, "t1")?;
    let lambda = need(cfg.params.lambda, "lambda")?;
    let lambda1 = need(cfg.params.lambda1, "lambda1")?;
    let mc = cfg.mc_config();
    let r = ibp_residual(&cfg.kernel, t, t1, lambda, lambda1, &mc)?;
    let k = spec.k_sigma;
    let mut checks = vec![Check::at_most("abs(lhs - rhs)", r.residual.abs(), k * r.stderr + spec.bias)];
    if let Some(o) = r.oracle {
        checks.push(Check::at_most("abs(lhs - oracle)", (r.lhs - o.value).abs(), k * r.lhs_stderr + spec.bias));
        checks.push(Check::at_most("abs(rhs - oracle)", (r.rhs - o.value).abs(), k * r.rhs_stderr + spec.bias));
    }
    let params = json!({"t": t, "t1": t1, "lambda": lambda, "lambda1": lambda1});
    let rec = EstimatorRecord::from_residual("ibp_residual", &cfg.kernel, params, &mc, &r);
    let mut result = to_value(&rec);
    result["lhs_stderr"] = json!(r.lhs_stderr);
    result["rhs_stderr"] = json!(r.rhs_stderr);
    Ok(Outcome {
        result,
        checks,
        tables: Vec::new(),
    })
}

pub fn moments(cfg: &ExperimentConfig, spec: &AssertSpec) -> Result<Outcome, Failure> {
    let a = need(cfg.params.a, "a")?;
    let r = need(cfg.params.r, "r")?;
    let mc = cfg.mc_config();
    match cfg.params.moment.unwrap_or(MomentKind::Negative) {
        MomentKind::Negative => {
            let e: Estimate = negative_moment(&cfg.kernel, a, r, &mc)?;
            let bound = oracles::neg_moment_bound(r, a);
            let is_bm = matches!(cfg.kernel, Kernel::StandardBrownian)
                || cfg.kernel.hurst() == Some(0.5);
            let mode = if is_bm { AssertMode::Equal } else { AssertMode::UpperBound };
            let mut checks = oracle_checks(spec, mode, e.mean, e.stderr, bound);
            checks.extend(truncation_check(spec, e.truncation_bound));
            let rec = EstimatorRecord::from_estimate("negative_moment", &cfg.kernel, json!({"a": a, "r": r}), &mc, &e)
                .with_oracle(OracleValue::new(bound, FormulaId::NegMomentBound));
            Ok(Outcome {
                result: to_value(&rec),
                checks,
                tables: Vec::new(),
            })
        }
        MomentKind::Positive => {
            let schedule: Vec<Grid> = cfg
                .params
                .schedule
                .clone()
                .ok_or_else(|| Failure::Config("missing params.schedule".into()))?;
            let s = positive_moment_divergence(&cfg.kernel, a, r, &mc, &schedule)?;
            let mut checks = vec![Check::flag("strictly increasing", s.strictly_increasing)];
            if let (Some(lb), Some(last)) = (s.lower_bound, s.estimates.last()) {
                checks.push(Check::at_least(
                    "final estimate + k_sigma*stderr",
                    last.mean + spec.k_sigma * last.stderr,
                    lb,
                ));
            }
            let mut csv = String::from("t_max,mean,stderr,censored\n");
            for (t, e) in s.horizons.iter().zip(&s.estimates) {
                writeln!(csv, "{:.16e},{:.16e},{:.16e},{}", t, e.mean, e.stderr, e.censored_count).unwrap();
            }
            Ok(Outcome {
                result: json!({
                    "estimator": "positive_moment_divergence",
                    "kernel": cfg.kernel,
                    "params": {"a": a, "r": r},
                    "schedule": schedule,
                    "result": s,
                    "seed": mc.master_seed,
                    "oracle": s.lower_bound.map(|v| OracleValue::new(v, FormulaId::PosMomentLower)),
                }),
                checks,
                tables: vec![("moment_schedule.csv".into(), csv)],
            })
        }
    }
}

pub fn tail(cfg: &ExperimentConfig, spec: &AssertSpec) -> Result<Outcome, Failure> {
    let a = cfg.params.a.unwrap_or(1.0);
    let probes = match &cfg.params.probes {
        Some(p) => p.clone(),
        None => estimators::log_spaced(cfg.grid.t_max() / 100.0, cfg.grid.t_max(), 9),
    };
    let mc = cfg.mc_config();
    let fit = tail_exponent(&cfg.kernel, a, &probes, &mc)?;
    let mut checks = Vec::new();
    let range = spec.slope_range.or_else(|| {
        cfg.kernel.hurst().map(|h| {
            let target = -(1.0 - h);
            [target - 0.1, target + 0.1]
        })
    });
    if let Some([lo, hi]) = range {
        checks.push(Check::at_least("slope >= lower", fit.slope, lo));
        checks.push(Check::at_most("slope <= upper", fit.slope, hi));
    }
    let mut csv = String::from("t,survival,stderr,survivors,used\n");
    let mut rows: Vec<(f64, &gphit_core::estimators::TailPoint, bool)> = fit
        .points
        .iter()
        .map(|p| (p.t, p, true))
        .chain(fit.dropped.iter().map(|p| (p.t, p, false)))
        .collect();
    rows.sort_by(|x, y| x.0.total_cmp(&y.0));
    for (_, p, used) in rows {
        writeln!(csv, "{:.16e},{:.16e},{:.16e},{},{}", p.t, p.survival, p.stderr, p.survivors, used).unwrap();
    }
    Ok(Outcome {
        result: json!({
            "estimator": "tail_exponent",
            "kernel": cfg.kernel,
            "params": {"a": a, "probes": probes},
            "fit": fit,
            "seed": mc.master_seed,
            "grid": cfg.grid,
        }),
        checks,
        tables: vec![("tail_points.csv".into(), csv)],
    })
}

pub fn check_kernel(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let probes: Vec<f64> = match &cfg.params.probes {
        Some(p) => p.clone(),
        None => cfg.grid.nodes().skip(1).collect(),
    };
    let report = cfg.kernel.check_hypotheses(&probes)?;
    let mut checks = vec![
        Check::flag("h0", report.h0_pass),
        Check::flag("h3", report.h3_pass),
    ];
    if report.h1_claimed {
        checks.push(Check::flag("h1", report.h1_pass));
    }
    if report.dr_nonneg_claimed {
        checks.push(Check::flag("dR/ds >= 0", report.dr_nonneg_pass));
    }
    Ok(Outcome {
        result: to_value(&report),
        checks,
        tables: Vec::new(),
    })
}
