use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dR/ds is undefined on the diagonal s = t = {0} for this kernel")]
    DiagonalUndefined(f64),

    #[error("covariance matrix is not positive definite (pivot {pivot} = {value:e}, jitter {jitter:e})")]
    NotPositiveDefinite { pivot: usize, value: f64, jitter: f64 },

    #[error("circulant embedding has negative eigenvalue {min_eigenvalue:e} at embedding size {size}")]
    EmbeddingFailed { size: usize, min_eigenvalue: f64 },

    #[error("sampler method {method} does not support kernel {kernel}")]
    UnsupportedSampler { method: &'static str, kernel: String },

    #[error("kernel {0} violates the continuous-derivative hypothesis (dR/ds continuous on the closed quadrant)")]
    KernelH1Violated(String),

    #[error("censoring excess: {0}")]
    CensoringExcess(String),

    #[error("time {0} is not a grid node")]
    NodesMissing(f64),

    #[error("level {level} outside (0, {s_max}]")]
    OutOfRange { level: f64, s_max: f64 },

    #[error("moment order r = {0} lies in the divergence regime r >= 1/2")]
    DivergenceRegime(f64),

    #[error("only {remaining} probes kept after dropping thin ones; need at least 4")]
    TooFewProbes { remaining: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Numerical failures as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::EmbeddingFailed { .. }
                | Error::KernelH1Violated(_)
                | Error::CensoringExcess(_)
                | Error::TooFewProbes { .. }
                | Error::DivergenceRegime(_)
        )
    }
}

pub(crate) fn ensure_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite, got {v}")))
    }
}

pub(crate) fn ensure_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}
