use crate::error::{Error, Result};
use crate::kernels::Kernel;

use super::Grid;

/// Lower Cholesky factor of `Σ_ij = R(t_i, t_j)`, `i, j = 1..=n`, packed by
/// rows. A failed factorization is retried once with `1e-12 · max Σ_ii` on
/// the diagonal; the jitter actually used is returned.
pub(super) fn factor_grid_covariance(kernel: &Kernel, grid: &Grid) -> Result<(Vec<f64>, f64)> {
    let n = grid.n();
    let times: Vec<f64> = (1..=n).map(|i| grid.node(i)).collect();
    let mut sigma = vec![0.0; n * (n + 1) / 2];
    for i in 0..n {
        let row = i * (i + 1) / 2;
        for j in 0..=i {
            sigma[row + j] = kernel.cov_raw(times[i], times[j]);
        }
    }
    match factor_packed(&sigma, n, 0.0) {
        Ok(l) => Ok((l, 0.0)),
        Err(_) => {
            let max_diag = (0..n).map(|i| sigma[i * (i + 1) / 2 + i]).fold(0.0, f64::max);
            let jitter = 1e-12 * max_diag;
            factor_packed(&sigma, n, jitter).map(|l| (l, jitter))
        }
    }
}

fn factor_packed(sigma: &[f64], n: usize, jitter: f64) -> Result<Vec<f64>> {
    let mut l = vec![0.0; sigma.len()];
    for i in 0..n {
        let ri = i * (i + 1) / 2;
        for j in 0..=i {
            let rj = j * (j + 1) / 2;
            let mut sum = sigma[ri + j];
            if i == j {
                sum += jitter;
            }
            sum -= l[ri..ri + j]
                .iter()
                .zip(&l[rj..rj + j])
                .map(|(a, b)| a * b)
                .sum::<f64>();
            if i == j {
                if !(sum > 0.0) {
                    return Err(Error::NotPositiveDefinite {
                        pivot: i,
                        value: sum,
                        jitter,
                    });
                }
                l[ri + i] = sum.sqrt();
            } else {
                l[ri + j] = sum / l[rj + j];
            }
        }
    }
    Ok(l)
}

/// `out = L z` for a packed lower factor.
pub(super) fn apply_lower(l: &[f64], z: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        let row = i * (i + 1) / 2;
        *o = l[row..=row + i].iter().zip(&z[..=i]).map(|(a, b)| a * b).sum();
    }
}
