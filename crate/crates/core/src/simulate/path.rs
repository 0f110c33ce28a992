use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `t_i = i · t_max / n`, `i = 0..=n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    t_max: f64,
    n: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    t_max: f64,
    n: usize,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;
    fn try_from(s: GridSpec) -> Result<Self> {
        Grid::new(s.t_max, s.n)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec { t_max: g.t_max, n: g.n }
    }
}

impl Grid {
    pub fn new(t_max: f64, n: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::invalid(format!("grid t_max must be positive, got {t_max}")));
        }
        if n < 2 {
            return Err(Error::invalid(format!("grid needs n >= 2 steps, got {n}")));
        }
        Ok(Self { t_max, n })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Number of steps; there are `n + 1` nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn step(&self) -> f64 {
        self.t_max / self.n as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i == self.n {
            self.t_max
        } else {
            self.t_max * i as f64 / self.n as f64
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(|i| self.node(i))
    }

    /// Index of the node equal to `t` up to rounding, if any.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        if !(t >= 0.0 && t <= self.t_max) {
            return None;
        }
        let i = (t / self.step()).round() as usize;
        (i <= self.n && (self.node(i) - t).abs() <= 1e-12 * self.t_max).then_some(i)
    }

    /// Every `factor`-th node, as a coarser grid on the same horizon.
    pub fn coarsen(&self, factor: usize) -> Result<Grid> {
        if factor == 0 || !self.n.is_multiple_of(factor) {
            return Err(Error::invalid(format!("cannot coarsen n = {} by {factor}", self.n)));
        }
        Grid::new(self.t_max, self.n / factor)
    }
}

/// One sampled trajectory, piecewise linear between nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    grid: Grid,
    values: Vec<f64>,
}

impl Path {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() + 1 {
            return Err(Error::invalid(format!(
                "path has {} values for {} nodes",
                values.len(),
                grid.n() + 1
            )));
        }
        if values[0] != 0.0 {
            return Err(Error::invalid("path must start at 0"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("path values must be finite"));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_parts(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n() + 1);
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear interpolation; times outside `[0, t_max]` are clamped.
    #[inline]
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.grid.n();
        let x = (t / self.grid.step()).max(0.0);
        let k = (x.floor() as usize).min(n - 1);
        let t0 = self.grid.node(k);
        let t1 = self.grid.node(k + 1);
        let theta = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        self.values[k] + theta * (self.values[k + 1] - self.values[k])
    }

    /// Running maximum of the interpolated path on `[0, t]`.
    pub fn running_max(&self, t: f64) -> f64 {
        let k = ((t / self.grid.step()).floor() as usize).min(self.grid.n());
        let nodes = self.values[..=k].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        nodes.max(self.value_at(t))
    }

    /// Decimated copy on a coarser grid sharing every `factor`-th node.
    pub fn coarsen(&self, factor: usize) -> Result<Path> {
        let grid = self.grid.coarsen(factor)?;
        let values = self.values.iter().step_by(factor).copied().collect();
        Ok(Path::from_parts(grid, values))
    }

    /// CSV with header `t,x` and 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e}", self.grid.node(i), v)?;
        }
        Ok(())
    }
}
