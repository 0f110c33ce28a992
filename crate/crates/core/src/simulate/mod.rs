//! Exact sampling of Gaussian paths on a uniform grid.
//!
//! Four exact samplers are available: a dense Cholesky factor (any kernel
//! with a positive-definite grid covariance), circulant embedding of the
//! stationary fBm increments, independent Gaussian increments (Brownian and
//! other independent-increment kernels) and the rank-one law `X_t = Y t` of
//! the linear kernel. Paths are a pure function of
//! `(plan, master_seed, replicate)`.

mod circulant;
mod cholesky;
mod path;

pub use path::{Grid, Path};

use std::fmt;
use std::sync::Arc;

use rustfft::Fft;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::rng::NormalStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerMethod {
    Cholesky,
    Circulant,
    /// Cumulative sum of independent `N(0, V(t_i) - V(t_{i-1}))` increments.
    Increments,
    /// `X_t = Y t` with a single standard normal `Y`.
    RankOne,
}

impl SamplerMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SamplerMethod::Cholesky => "cholesky",
            SamplerMethod::Circulant => "circulant",
            SamplerMethod::Increments => "increments",
            SamplerMethod::RankOne => "rank-one",
        }
    }
}

impl fmt::Display for SamplerMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sampler selection; `Auto` picks the cheapest exact method for the kernel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerChoice {
    #[default]
    Auto,
    Cholesky,
    Circulant,
    Increments,
    RankOne,
}

#[derive(Clone)]
enum Factor {
    Cholesky(Vec<f64>),
    Circulant {
        eigenvalues: Vec<f64>,
        scale: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    Increments(Vec<f64>),
    RankOne,
}

/// A precomputed sampler for one kernel on one grid. Immutable and shareable
/// across threads.
#[derive(Clone)]
pub struct SamplerPlan {
    method: SamplerMethod,
    kernel: Kernel,
    grid: Grid,
    jitter_applied: f64,
    embedding_size: Option<usize>,
    factor: Factor,
}

impl fmt::Debug for SamplerPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SamplerPlan")
            .field("method", &self.method)
            .field("kernel", &self.kernel)
            .field("grid", &self.grid)
            .field("jitter_applied", &self.jitter_applied)
            .field("embedding_size", &self.embedding_size)
            .finish_non_exhaustive()
    }
}

impl SamplerPlan {
    pub fn method(&self) -> SamplerMethod {
        self.method
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn jitter_applied(&self) -> f64 {
        self.jitter_applied
    }

    /// Circulant size `2m`, circulant plans only.
    pub fn embedding_size(&self) -> Option<usize> {
        self.embedding_size
    }

    /// Packed rows of the lower Cholesky factor of `R(t_i, t_j)`, `i, j ≥ 1`;
    /// row `i` (0-based) starts at `i (i + 1) / 2`.
    pub fn cholesky_factor(&self) -> Option<&[f64]> {
        match &self.factor {
            Factor::Cholesky(l) => Some(l),
            _ => None,
        }
    }

    /// Clamped circulant eigenvalues.
    pub fn circulant_eigenvalues(&self) -> Option<&[f64]> {
        match &self.factor {
            Factor::Circulant { eigenvalues, .. } => Some(eigenvalues),
            _ => None,
        }
    }
}

pub fn plan_cholesky(kernel: &Kernel, grid: &Grid) -> Result<SamplerPlan> {
    let (factor, jitter) = cholesky::factor_grid_covariance(kernel, grid)?;
    Ok(SamplerPlan {
        method: SamplerMethod::Cholesky,
        kernel: *kernel,
        grid: *grid,
        jitter_applied: jitter,
        embedding_size: None,
        factor: Factor::Cholesky(factor),
    })
}

pub fn plan_circulant(kernel: &Kernel, grid: &Grid) -> Result<SamplerPlan> {
    let hurst = match *kernel {
        Kernel::FractionalBrownian { hurst } => hurst,
        _ => {
            return Err(Error::UnsupportedSampler {
                method: "circulant",
                kernel: kernel.to_string(),
            })
        }
    };
    let emb = circulant::embed(hurst, grid)?;
    Ok(SamplerPlan {
        method: SamplerMethod::Circulant,
        kernel: *kernel,
        grid: *grid,
        jitter_applied: 0.0,
        embedding_size: Some(emb.size),
        factor: Factor::Circulant {
            eigenvalues: emb.eigenvalues,
            scale: emb.scale,
            fft: emb.fft,
        },
    })
}

pub fn plan_increments(kernel: &Kernel, grid: &Grid) -> Result<SamplerPlan> {
    let ok = match *kernel {
        Kernel::StandardBrownian | Kernel::IndependentIncrements(_) => true,
        Kernel::FractionalBrownian { hurst } => hurst == 0.5,
        Kernel::Linear => false,
    };
    if !ok {
        return Err(Error::UnsupportedSampler {
            method: "increments",
            kernel: kernel.to_string(),
        });
    }
    let sd = (1..=grid.n())
        .map(|i| (kernel.variance_raw(grid.node(i)) - kernel.variance_raw(grid.node(i - 1))).sqrt())
        .collect();
    Ok(SamplerPlan {
        method: SamplerMethod::Increments,
        kernel: *kernel,
        grid: *grid,
        jitter_applied: 0.0,
        embedding_size: None,
        factor: Factor::Increments(sd),
    })
}

pub fn plan_rank_one(kernel: &Kernel, grid: &Grid) -> Result<SamplerPlan> {
    let ok = match *kernel {
        Kernel::Linear => true,
        Kernel::FractionalBrownian { hurst } => hurst == 1.0,
        _ => false,
    };
    if !ok {
        return Err(Error::UnsupportedSampler {
            method: "rank-one",
            kernel: kernel.to_string(),
        });
    }
    Ok(SamplerPlan {
        method: SamplerMethod::RankOne,
        kernel: *kernel,
        grid: *grid,
        jitter_applied: 0.0,
        embedding_size: None,
        factor: Factor::RankOne,
    })
}

/// Builds a plan; `Auto` falls back from circulant embedding to Cholesky if
/// the embedding cannot be made nonnegative.
pub fn plan(kernel: &Kernel, grid: &Grid, choice: SamplerChoice) -> Result<SamplerPlan> {
    match choice {
        SamplerChoice::Cholesky => plan_cholesky(kernel, grid),
        SamplerChoice::Circulant => plan_circulant(kernel, grid),
        SamplerChoice::Increments => plan_increments(kernel, grid),
        SamplerChoice::RankOne => plan_rank_one(kernel, grid),
        SamplerChoice::Auto => match *kernel {
            Kernel::StandardBrownian | Kernel::IndependentIncrements(_) => plan_increments(kernel, grid),
            Kernel::Linear => plan_rank_one(kernel, grid),
            Kernel::FractionalBrownian { hurst } if hurst == 1.0 => plan_rank_one(kernel, grid),
            Kernel::FractionalBrownian { hurst } if hurst == 0.5 => plan_increments(kernel, grid),
            Kernel::FractionalBrownian { .. } => match plan_circulant(kernel, grid) {
                Err(Error::EmbeddingFailed { .. }) => plan_cholesky(kernel, grid),
                other => other,
            },
        },
    }
}

/// One exact draw of `(X_{t_0}, …, X_{t_n})` with `X_0 = 0`.
pub fn sample_path(plan: &SamplerPlan, master_seed: u64, replicate: u64) -> Path {
    let grid = plan.grid;
    let n = grid.n();
    let mut normals = NormalStream::for_replicate(master_seed, replicate);
    let mut values = vec![0.0; n + 1];
    match &plan.factor {
        Factor::Cholesky(l) => {
            let mut z = vec![0.0; n];
            normals.fill(&mut z);
            cholesky::apply_lower(l, &z, &mut values[1..]);
        }
        Factor::Circulant { scale, fft, .. } => {
            let increments = circulant::draw_increments(scale, fft.as_ref(), n, &mut normals);
            let mut acc = 0.0;
            for (v, dx) in values[1..].iter_mut().zip(&increments) {
                acc += dx;
                *v = acc;
            }
        }
        Factor::Increments(sd) => {
            let mut acc = 0.0;
            for (v, s) in values[1..].iter_mut().zip(sd) {
                acc += s * normals.next_normal();
                *v = acc;
            }
        }
        Factor::RankOne => {
            let y = normals.next_normal();
            for (i, v) in values.iter_mut().enumerate().skip(1) {
                *v = y * grid.node(i);
            }
        }
    }
    Path::from_parts(grid, values)
}
