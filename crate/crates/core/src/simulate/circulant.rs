//! Circulant embedding of fractional Gaussian noise.
//!
//! The increment autocovariance `γ(k)` is wrapped into a symmetric circulant
//! of size `2m`; its eigenvalues come from one FFT, and a draw is one more FFT
//! of Hermitian-symmetric complex noise scaled by `√(λ_k / 2m)`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::rng::NormalStream;

use super::Grid;

/// Relative threshold below which negative eigenvalues are treated as zero.
const NEGATIVE_EIGEN_TOL: f64 = 1e-10;
/// Largest `m` tried is this multiple of `n`.
const MAX_GROWTH: usize = 64;

pub(super) struct Embedding {
    pub size: usize,
    pub eigenvalues: Vec<f64>,
    /// Per-frequency noise scale, already folded for the Hermitian pairing.
    pub scale: Vec<f64>,
    pub fft: Arc<dyn Fft<f64>>,
}

pub(crate) fn increment_autocov(hurst: f64, step: f64, k: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * step.powf(h2) * ((k + 1.0).powf(h2) + (k - 1.0).abs().powf(h2) - 2.0 * k.powf(h2))
}

pub(super) fn embed(hurst: f64, grid: &Grid) -> Result<Embedding> {
    let n = grid.n();
    let step = grid.step();
    let mut planner = FftPlanner::<f64>::new();
    let mut m = n.next_power_of_two();
    loop {
        let size = 2 * m;
        let mut buf: Vec<Complex64> = (0..size)
            .map(|j| {
                let lag = if j <= m { j } else { size - j };
                Complex64::new(increment_autocov(hurst, step, lag), 0.0)
            })
            .collect();
        let fft = planner.plan_fft_forward(size);
        fft.process(&mut buf);
        let raw: Vec<f64> = buf.iter().map(|c| c.re).collect();
        let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
        if min >= -NEGATIVE_EIGEN_TOL * max {
            let eigenvalues: Vec<f64> = raw.into_iter().map(|v| v.max(0.0)).collect();
            let nf = size as f64;
            let scale = eigenvalues
                .iter()
                .enumerate()
                .map(|(k, &lam)| {
                    if k == 0 || k == m {
                        (lam / nf).sqrt()
                    } else {
                        (lam / (2.0 * nf)).sqrt()
                    }
                })
                .collect();
            return Ok(Embedding {
                size,
                eigenvalues,
                scale,
                fft,
            });
        }
        if 2 * m > MAX_GROWTH * n {
            return Err(Error::EmbeddingFailed {
                size,
                min_eigenvalue: min,
            });
        }
        m *= 2;
    }
}

/// First `n` increments of one exact draw.
pub(super) fn draw_increments(
    scale: &[f64],
    fft: &dyn Fft<f64>,
    n: usize,
    normals: &mut NormalStream,
) -> Vec<f64> {
    let size = scale.len();
    let m = size / 2;
    let mut buf = vec![Complex64::new(0.0, 0.0); size];
    buf[0] = Complex64::new(scale[0] * normals.next_normal(), 0.0);
    buf[m] = Complex64::new(scale[m] * normals.next_normal(), 0.0);
    for k in 1..m {
        let re = normals.next_normal();
        let im = normals.next_normal();
        let w = Complex64::new(scale[k] * re, scale[k] * im);
        buf[k] = w;
        buf[size - k] = w.conj();
    }
    fft.process(&mut buf);
    buf[..n].iter().map(|c| c.re).collect()
}
