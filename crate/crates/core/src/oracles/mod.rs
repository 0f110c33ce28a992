//! Closed-form reference values for hitting-time functionals.

mod gamma;

pub use gamma::gamma;

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::kernels::Kernel;
use crate::quadrature;

/// Which closed form an oracle value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulaId {
    /// Brownian hitting-time Laplace transform `exp(-a√(2α))`.
    BmLaplace,
    /// Linear (H = 1) process, `E exp(-ατ_a²) = ½ exp(-a√(2α))`.
    LinearLaplace,
    /// Independent increments, `E exp(-(λ²/2) V(τ_a)) = exp(-λa)`.
    IndepIncrLaplace,
    /// Upper bound on `E V(τ_a)^{-r}`.
    NegMomentBound,
    /// Lower bound on `E V(τ_a)^{r}`, `r < 1/2`.
    PosMomentLower,
    /// Single-factor Gaussian integration-by-parts value.
    GaussianMgfIbp,
}

impl FormulaId {
    pub const ALL: [FormulaId; 6] = [
        FormulaId::BmLaplace,
        FormulaId::LinearLaplace,
        FormulaId::IndepIncrLaplace,
        FormulaId::NegMomentBound,
        FormulaId::PosMomentLower,
        FormulaId::GaussianMgfIbp,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: f64,
    pub formula_id: FormulaId,
}

impl OracleValue {
    pub fn new(value: f64, formula_id: FormulaId) -> Self {
        debug_assert!(value.is_finite());
        Self { value, formula_id }
    }
}

/// `E exp(-α τ_a)` for standard Brownian motion.
pub fn bm_laplace(a: f64, alpha: f64) -> f64 {
    (-a * (2.0 * alpha).sqrt()).exp()
}

/// `E exp(-α τ_a²)` for `X_t = Y t`, `Y ~ N(0, 1)`.
pub fn linear_laplace(a: f64, alpha: f64) -> f64 {
    0.5 * bm_laplace(a, alpha)
}

/// `E exp(-(λ²/2) V(τ_a))` for processes with independent increments.
pub fn indep_incr_laplace(a: f64, lambda: f64) -> f64 {
    (-lambda * a).exp()
}

/// `2^r Γ(r + 1/2) / √π · a^{-2r}`.
pub fn neg_moment_bound(r: f64, a: f64) -> f64 {
    2f64.powf(r) * gamma(r + 0.5) / PI.sqrt() * a.powf(-2.0 * r)
}

/// `r/Γ(1-r) ∫_0^∞ (1 - exp(-a√(2α))) α^{-r-1} dα` for `r ∈ (0, 1/2)`.
///
/// With `u = a√(2α)` the integral becomes
/// `2^{r+1} a^{2r} ∫_0^∞ (1 - e^{-u}) u^{-2r-1} du`; the two halves of the
/// u-range get power substitutions that flatten their endpoint behaviour
/// before adaptive quadrature. For `r ≥ 1/2` the integral diverges at the
/// origin.
pub fn pos_moment_lower(r: f64, a: f64) -> Result<f64> {
    ensure_positive("a", a)?;
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::invalid(format!("r must lie in (0, 1), got {r}")));
    }
    if r >= 0.5 {
        return Err(Error::DivergenceRegime(r));
    }
    let p = 1.0 / (1.0 - 2.0 * r);
    let head = quadrature::adaptive(
        |v: f64| {
            if v <= 0.0 {
                return p;
            }
            p * (-(-v.powf(p)).exp_m1()) * v.powf(-2.0 * r * p - 1.0)
        },
        0.0,
        1.0,
        1e-11,
        1e-14,
    );
    let q = 1.0 / (2.0 * r);
    let tail = quadrature::adaptive(
        |v: f64| q * (-(-v.powf(-q)).exp_m1()),
        0.0,
        1.0,
        1e-11,
        1e-14,
    );
    let scale = 2f64.powf(r + 1.0) * a.powf(2.0 * r);
    Ok(r / gamma(1.0 - r) * scale * (head + tail))
}

/// `(1/λ) E(exp(λ₁ X_{t₁}) (M_t - 1))` through the Gaussian moment generating
/// function: `(1/λ) exp(½λ₁² R(t₁,t₁)) (exp(λλ₁ R(t,t₁)) - 1)`.
pub fn gaussian_mgf_ibp(kernel: &Kernel, t: f64, t1: f64, lambda: f64, lambda1: f64) -> Result<f64> {
    ensure_finite("lambda", lambda)?;
    ensure_finite("lambda1", lambda1)?;
    if lambda == 0.0 {
        return Err(Error::invalid("lambda must be nonzero"));
    }
    let r_cross = kernel.cov(t, t1)?;
    let r_diag = kernel.variance(t1)?;
    Ok((0.5 * lambda1 * lambda1 * r_diag).exp() * (lambda * lambda1 * r_cross).exp_m1() / lambda)
}
