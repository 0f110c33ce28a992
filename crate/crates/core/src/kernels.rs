//! Covariance models of centred Gaussian processes started at zero.
//!
//! Each built-in kernel carries its covariance `R(s, t)`, the variance
//! `V(t) = R(t, t)`, and an analytic `∂R/∂s`. The derivative is needed on and
//! next to the diagonal, where finite differences are useless, so user-defined
//! covariances are deliberately not supported.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::quadrature;

/// Nondecreasing variance profile of an independent-increment process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum VarianceFn {
    /// `V(t) = c t^γ`
    Power { c: f64, gamma: f64 },
}

impl VarianceFn {
    pub fn power(c: f64, gamma: f64) -> Result<Self> {
        ensure_positive("variance.c", c)?;
        ensure_positive("variance.gamma", gamma)?;
        Ok(VarianceFn::Power { c, gamma })
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            VarianceFn::Power { c, gamma } => c * t.powf(gamma),
        }
    }

    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            VarianceFn::Power { c, gamma } => c * gamma * t.powf(gamma - 1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    FractionalBrownian,
    StandardBrownian,
    Linear,
    IndependentIncrements,
}

/// A built-in covariance model.
///
/// `Linear` is fractional Brownian motion with `H = 1` (`X_t = Y t`) and
/// `StandardBrownian` the `H = 1/2` case; both keep their own variant so
/// that their exact special-case samplers and closed forms apply.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpec", into = "KernelSpec")]
pub enum Kernel {
    FractionalBrownian { hurst: f64 },
    StandardBrownian,
    Linear,
    IndependentIncrements(VarianceFn),
}

impl Kernel {
    pub fn fbm(hurst: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst <= 1.0) {
            return Err(Error::invalid(format!("hurst must lie in (0, 1], got {hurst}")));
        }
        Ok(Kernel::FractionalBrownian { hurst })
    }

    pub fn indep_power(c: f64, gamma: f64) -> Result<Self> {
        Ok(Kernel::IndependentIncrements(VarianceFn::power(c, gamma)?))
    }

    pub fn family(&self) -> Family {
        match self {
            Kernel::FractionalBrownian { .. } => Family::FractionalBrownian,
            Kernel::StandardBrownian => Family::StandardBrownian,
            Kernel::Linear => Family::Linear,
            Kernel::IndependentIncrements(_) => Family::IndependentIncrements,
        }
    }

    pub fn hurst(&self) -> Option<f64> {
        match *self {
            Kernel::FractionalBrownian { hurst } => Some(hurst),
            _ => None,
        }
    }

    /// `∂R/∂s` extends continuously to the closed quadrant.
    pub fn h1_satisfied(&self) -> bool {
        match *self {
            Kernel::FractionalBrownian { hurst } => hurst > 0.5,
            Kernel::Linear => true,
            Kernel::StandardBrownian | Kernel::IndependentIncrements(_) => false,
        }
    }

    /// `∂R/∂s(s, t) ≥ 0` for all `s ≠ t`.
    pub fn dr_nonneg(&self) -> bool {
        match *self {
            Kernel::FractionalBrownian { hurst } => hurst >= 0.5,
            _ => true,
        }
    }

    /// Documented status of `limsup X_t = +∞` a.s.; this is an analytic
    /// property and is never checked numerically.
    pub fn h2_status(&self) -> H2Status {
        match self {
            Kernel::Linear => H2Status {
                holds: false,
                note: "limsup is +inf only on {Y > 0}, an event of probability 1/2",
            },
            Kernel::FractionalBrownian { .. } => H2Status {
                holds: true,
                note: "law of the iterated logarithm for fBm",
            },
            Kernel::StandardBrownian => H2Status {
                holds: true,
                note: "law of the iterated logarithm",
            },
            Kernel::IndependentIncrements(_) => H2Status {
                holds: true,
                note: "time-changed Brownian motion with V(t) -> inf",
            },
        }
    }

    pub fn cov(&self, s: f64, t: f64) -> Result<f64> {
        check_time(s)?;
        check_time(t)?;
        Ok(self.cov_raw(s, t))
    }

    pub fn variance(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.variance_raw(t))
    }

    /// `∂R/∂s(s, t)`; on the diagonal this is the continuous extension and
    /// exists only for kernels with [`Kernel::h1_satisfied`].
    pub fn dcov_ds(&self, s: f64, t: f64) -> Result<f64> {
        check_time(s)?;
        check_time(t)?;
        if s == t && !self.h1_satisfied() {
            return Err(Error::DiagonalUndefined(s));
        }
        Ok(self.dcov_ds_raw(s, t))
    }

    #[inline]
    pub(crate) fn cov_raw(&self, s: f64, t: f64) -> f64 {
        match *self {
            Kernel::FractionalBrownian { hurst } => {
                let h2 = 2.0 * hurst;
                0.5 * (t.powf(h2) + s.powf(h2) - (t - s).abs().powf(h2))
            }
            Kernel::StandardBrownian => s.min(t),
            Kernel::Linear => s * t,
            Kernel::IndependentIncrements(v) => v.value(s.min(t)),
        }
    }

    #[inline]
    pub(crate) fn variance_raw(&self, t: f64) -> f64 {
        match *self {
            Kernel::FractionalBrownian { hurst } => t.powf(2.0 * hurst),
            Kernel::StandardBrownian => t,
            Kernel::Linear => t * t,
            Kernel::IndependentIncrements(v) => v.value(t),
        }
    }

    #[inline]
    pub(crate) fn dcov_ds_raw(&self, s: f64, t: f64) -> f64 {
        match *self {
            Kernel::FractionalBrownian { hurst } => {
                let e = 2.0 * hurst - 1.0;
                if s == t {
                    hurst * s.powf(e)
                } else {
                    let d = t - s;
                    hurst * (s.powf(e) + d.signum() * d.abs().powf(e))
                }
            }
            Kernel::StandardBrownian => {
                if s < t {
                    1.0
                } else {
                    0.0
                }
            }
            Kernel::Linear => t,
            Kernel::IndependentIncrements(v) => {
                if s < t {
                    v.derivative(s)
                } else {
                    0.0
                }
            }
        }
    }

    /// Numerical probes of the standing hypotheses on a set of times.
    pub fn check_hypotheses(&self, probe_grid: &[f64]) -> Result<HypothesisReport> {
        if probe_grid.is_empty() {
            return Err(Error::invalid("probe grid is empty"));
        }
        if probe_grid.iter().any(|&t| !(t.is_finite() && t > 0.0)) {
            return Err(Error::invalid("probe grid must be positive and finite"));
        }
        if probe_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("probe grid must be strictly increasing"));
        }

        let mut min_increment_variance = f64::INFINITY;
        let mut max_abs_dcov = 0.0f64;
        let mut min_dcov = f64::INFINITY;
        for (i, &s) in probe_grid.iter().enumerate() {
            for (j, &t) in probe_grid.iter().enumerate() {
                if i == j {
                    continue;
                }
                let d = self.dcov_ds_raw(s, t);
                max_abs_dcov = max_abs_dcov.max(d.abs());
                min_dcov = min_dcov.min(d);
                if i < j {
                    let inc = self.variance_raw(t) + self.variance_raw(s) - 2.0 * self.cov_raw(s, t);
                    min_increment_variance = min_increment_variance.min(inc);
                }
            }
        }
        // a single probe has no pairs; the increment from the origin still counts
        if probe_grid.len() == 1 {
            min_increment_variance = self.variance_raw(probe_grid[0]);
        }

        let mut diagonal_converges = true;
        let mut worst_final_gap = 0.0f64;
        for &s in probe_grid {
            let mut prev_gap = f64::INFINITY;
            let mut first_gap = None;
            for k in 1..=5 {
                let eps = s * 10f64.powi(-2 * k);
                let right = self.dcov_ds_raw(s, s + eps);
                let left = self.dcov_ds_raw(s, s - eps);
                if !(right.is_finite() && left.is_finite()) {
                    diagonal_converges = false;
                    break;
                }
                max_abs_dcov = max_abs_dcov.max(right.abs()).max(left.abs());
                let gap = (right - left).abs();
                if gap >= prev_gap && gap > 0.0 {
                    diagonal_converges = false;
                }
                first_gap.get_or_insert(gap);
                prev_gap = gap;
            }
            worst_final_gap = worst_final_gap.max(prev_gap);
            if let Some(g0) = first_gap {
                if prev_gap > 0.0 && prev_gap >= g0 {
                    diagonal_converges = false;
                }
            }
        }

        let horizon = *probe_grid.last().expect("nonempty");
        let mut max_abs_integral = 0.0f64;
        for &t in probe_grid {
            let f = |s: f64| self.dcov_ds_raw(s, t).abs();
            let v = quadrature::adaptive(f, 0.0, t, 1e-8, 1e-12)
                + if t < horizon {
                    quadrature::adaptive(f, t, horizon, 1e-8, 1e-12)
                } else {
                    0.0
                };
            max_abs_integral = max_abs_integral.max(v);
        }

        Ok(HypothesisReport {
            kernel: *self,
            h0_max_abs_integral: max_abs_integral,
            h0_pass: max_abs_integral.is_finite(),
            min_increment_variance,
            h3_pass: min_increment_variance > 0.0,
            max_abs_dcov_ds: max_abs_dcov,
            diagonal_final_gap: worst_final_gap,
            h1_claimed: self.h1_satisfied(),
            h1_pass: diagonal_converges && max_abs_dcov.is_finite(),
            min_dcov_ds: min_dcov,
            dr_nonneg_claimed: self.dr_nonneg(),
            dr_nonneg_pass: min_dcov >= 0.0,
            h2: self.h2_status(),
        })
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("time must be finite and nonnegative, got {t}")))
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::FractionalBrownian { hurst } => write!(f, "fbm(H={hurst})"),
            Kernel::StandardBrownian => write!(f, "bm"),
            Kernel::Linear => write!(f, "linear"),
            Kernel::IndependentIncrements(VarianceFn::Power { c, gamma }) => {
                write!(f, "indep(V={c}*t^{gamma})")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct H2Status {
    pub holds: bool,
    pub note: &'static str,
}

/// Pass/fail flags from [`Kernel::check_hypotheses`]. The `*_claimed` fields
/// are the kernel's analytic status, the `*_pass` fields what the probes saw.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub kernel: Kernel,
    /// `max_t ∫_0^T |∂R/∂s(s, t)| ds` over the probe times, `T` the last probe.
    pub h0_max_abs_integral: f64,
    pub h0_pass: bool,
    pub min_increment_variance: f64,
    pub h3_pass: bool,
    pub max_abs_dcov_ds: f64,
    /// Largest `|∂R/∂s(s, s+ε) - ∂R/∂s(s, s-ε)|` at the smallest probe offset.
    pub diagonal_final_gap: f64,
    pub h1_claimed: bool,
    pub h1_pass: bool,
    pub min_dcov_ds: f64,
    pub dr_nonneg_claimed: bool,
    pub dr_nonneg_pass: bool,
    pub h2: H2Status,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelSpec {
    family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hurst: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    variance: Option<VarianceFn>,
}

impl TryFrom<KernelSpec> for Kernel {
    type Error = Error;

    fn try_from(spec: KernelSpec) -> Result<Self> {
        let kernel = match spec.family.as_str() {
            "fbm" => {
                let hurst = spec
                    .hurst
                    .ok_or_else(|| Error::invalid("family fbm requires \"hurst\""))?;
                Kernel::fbm(hurst)?
            }
            "bm" => Kernel::StandardBrownian,
            "linear" => Kernel::Linear,
            "indep" => match spec.variance {
                Some(VarianceFn::Power { c, gamma }) => Kernel::indep_power(c, gamma)?,
                None => return Err(Error::invalid("family indep requires \"variance\"")),
            },
            other => return Err(Error::invalid(format!("unknown kernel family {other:?}"))),
        };
        if spec.hurst.is_some() && kernel.family() != Family::FractionalBrownian {
            return Err(Error::invalid("\"hurst\" is only allowed for family fbm"));
        }
        if spec.variance.is_some() && kernel.family() != Family::IndependentIncrements {
            return Err(Error::invalid("\"variance\" is only allowed for family indep"));
        }
        Ok(kernel)
    }
}

impl From<Kernel> for KernelSpec {
    fn from(k: Kernel) -> Self {
        let (family, hurst, variance) = match k {
            Kernel::FractionalBrownian { hurst } => ("fbm", Some(hurst), None),
            Kernel::StandardBrownian => ("bm", None, None),
            Kernel::Linear => ("linear", None, None),
            Kernel::IndependentIncrements(v) => ("indep", None, Some(v)),
        };
        KernelSpec {
            family: family.to_string(),
            hurst,
            variance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_kernels() -> Vec<Kernel> {
        vec![
            Kernel::fbm(0.3).unwrap(),
            Kernel::fbm(0.5).unwrap(),
            Kernel::fbm(0.75).unwrap(),
            Kernel::fbm(1.0).unwrap(),
            Kernel::StandardBrownian,
            Kernel::Linear,
            Kernel::indep_power(2.0, 0.7).unwrap(),
        ]
    }

    #[test]
    fn cov_examples() {
        let k = Kernel::fbm(0.5).unwrap();
        assert!((k.cov(1.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
        let k = Kernel::fbm(0.75).unwrap();
        assert!((k.cov(0.5, 1.0).unwrap() - 0.5).abs() < 1e-15);
        for k in all_kernels() {
            assert_eq!(k.cov(0.0, 3.0).unwrap(), 0.0, "{k}");
        }
        assert!(Kernel::Linear.cov(-1.0, 1.0).is_err());
    }

    #[test]
    fn dcov_examples() {
        let k = Kernel::fbm(0.75).unwrap();
        assert!((k.dcov_ds(1.0, 2.0).unwrap() - 1.5).abs() < 1e-15);
        let bm = Kernel::StandardBrownian;
        assert_eq!(bm.dcov_ds(1.0, 2.0).unwrap(), 1.0);
        assert_eq!(bm.dcov_ds(2.0, 1.0).unwrap(), 0.0);
        assert_eq!(bm.dcov_ds(1.0, 1.0), Err(Error::DiagonalUndefined(1.0)));
        assert_eq!(Kernel::Linear.dcov_ds(3.0, 4.0).unwrap(), 4.0);
        assert!(Kernel::fbm(0.3).unwrap().dcov_ds(1.0, 1.0).is_err());
        assert!((k.dcov_ds(4.0, 4.0).unwrap() - 0.75 * 2.0).abs() < 1e-15);
    }

    #[test]
    fn variance_examples() {
        let k = Kernel::fbm(0.75).unwrap();
        assert!((k.variance(2.0).unwrap() - 2.828_427_124_746_19).abs() < 1e-12);
        for k in all_kernels() {
            assert_eq!(k.variance(0.0).unwrap(), 0.0);
        }
        assert_eq!(Kernel::StandardBrownian.variance(7.0).unwrap(), 7.0);
    }

    #[test]
    fn hurst_validation() {
        assert!(Kernel::fbm(0.0).is_err());
        assert!(Kernel::fbm(1.5).is_err());
        assert!(Kernel::fbm(f64::NAN).is_err());
        assert!(Kernel::fbm(1.0).is_ok());
        assert!(Kernel::indep_power(0.0, 1.0).is_err());
    }

    #[test]
    fn flags() {
        assert!(Kernel::fbm(0.75).unwrap().h1_satisfied());
        assert!(!Kernel::fbm(0.5).unwrap().h1_satisfied());
        assert!(!Kernel::fbm(0.3).unwrap().dr_nonneg());
        assert!(Kernel::StandardBrownian.dr_nonneg());
        assert!(!Kernel::StandardBrownian.h1_satisfied());
        assert!(Kernel::Linear.h1_satisfied());
        assert!(!Kernel::Linear.h2_status().holds);
    }

    fn probe() -> Vec<f64> {
        (1..=50).map(|i| 0.1 * i as f64).collect()
    }

    #[test]
    fn hypotheses_fbm_075() {
        let r = Kernel::fbm(0.75).unwrap().check_hypotheses(&probe()).unwrap();
        assert!(r.h0_pass && r.h1_pass && r.h3_pass && r.dr_nonneg_pass, "{r:?}");
        assert!(r.dr_nonneg_claimed);
    }

    #[test]
    fn hypotheses_fbm_03_fails_h1() {
        let r = Kernel::fbm(0.3).unwrap().check_hypotheses(&probe()).unwrap();
        assert!(!r.h1_pass);
        assert!(!r.dr_nonneg_pass);
        assert!(r.h3_pass && r.h0_pass);
    }

    #[test]
    fn hypotheses_linear_and_bm() {
        let r = Kernel::Linear.check_hypotheses(&probe()).unwrap();
        assert!(r.h1_pass && r.dr_nonneg_pass && r.h3_pass);
        assert!(r.min_dcov_ds >= 0.0);
        let r = Kernel::StandardBrownian.check_hypotheses(&probe()).unwrap();
        assert!(!r.h1_pass && r.dr_nonneg_pass && r.h3_pass);
        let r = Kernel::indep_power(1.0, 2.0).unwrap().check_hypotheses(&probe()).unwrap();
        assert!(!r.h1_pass && r.h3_pass);
    }

    #[test]
    fn hypotheses_reject_bad_grid() {
        let k = Kernel::Linear;
        assert!(k.check_hypotheses(&[]).is_err());
        assert!(k.check_hypotheses(&[1.0, 1.0]).is_err());
        assert!(k.check_hypotheses(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn json_shapes() {
        let k: Kernel = serde_json::from_str(r#"{"family":"fbm","hurst":0.75}"#).unwrap();
        assert_eq!(k, Kernel::fbm(0.75).unwrap());
        let k: Kernel =
            serde_json::from_str(r#"{"family":"indep","variance":{"type":"power","c":2,"gamma":0.5}}"#).unwrap();
        assert_eq!(k, Kernel::indep_power(2.0, 0.5).unwrap());
        assert_eq!(serde_json::to_string(&Kernel::StandardBrownian).unwrap(), r#"{"family":"bm"}"#);
        for bad in [
            r#"{"family":"fbm","hurst":1.5}"#,
            r#"{"family":"fbm"}"#,
            r#"{"family":"bm","hurst":0.5}"#,
            r#"{"family":"linear","extra":1}"#,
            r#"{"family":"ou"}"#,
            r#"{"family":"indep","variance":{"type":"power","c":1}}"#,
        ] {
            assert!(serde_json::from_str::<Kernel>(bad).is_err(), "{bad}");
        }
    }
}
