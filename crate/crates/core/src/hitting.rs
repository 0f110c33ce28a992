//! First passages and the record-time decomposition of `y ↦ τ_y`.
//!
//! Paths are piecewise linear between nodes, and every hitting time in this
//! module is a crossing time of that interpolant. For a path on `[0, t_max]`
//! the map `y ↦ τ_y` over `(0, S_{t_max}]` splits into record segments, where
//! the path sets a new maximum and `τ` moves continuously with `y`, and jump
//! atoms, where a stalled maximum `y` is later strictly exceeded and `τ`
//! jumps from `τ_y` to `τ_{y+}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::gl16;
use crate::simulate::Path;

/// Crossing time of `level` on the chord `(t0, x0) → (t1, x1)`.
///
/// The one formula shared by [`first_hit`] and [`HittingProfile::tau_at`], so
/// the two agree bit for bit. A chord ending exactly on the level crosses at
/// `t1`.
#[inline]
fn crossing_time(t0: f64, x0: f64, t1: f64, x1: f64, level: f64) -> f64 {
    if x1 == level {
        t1
    } else {
        t0 + (level - x0) / (x1 - x0) * (t1 - t0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HitResult {
    pub hit: bool,
    /// Interpolated first crossing, present iff `hit`.
    pub tau: Option<f64>,
    /// First node with value `>= level`.
    pub grid_index: Option<usize>,
}

/// First time the interpolated path reaches `level > 0`.
pub fn first_hit(path: &Path, level: f64) -> Result<HitResult> {
    if !(level.is_finite() && level > 0.0) {
        return Err(Error::invalid(format!("level must be positive, got {level}")));
    }
    let v = path.values();
    let grid = path.grid();
    match v.iter().position(|&x| x >= level) {
        Some(i) => {
            // v[0] = 0 < level, so i >= 1
            let tau = crossing_time(grid.node(i - 1), v[i - 1], grid.node(i), v[i], level);
            Ok(HitResult {
                hit: true,
                tau: Some(tau),
                grid_index: Some(i),
            })
        }
        None => Ok(HitResult {
            hit: false,
            tau: None,
            grid_index: None,
        }),
    }
}

/// Levels `(y_lo, y_hi]` reached for the first time while the path climbs
/// through one grid cell; `τ_y` runs linearly from `t_lo` to `t_hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RecordSegment {
    pub y_lo: f64,
    pub y_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    #[serde(skip)]
    cell: Chord,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Chord {
    t0: f64,
    x0: f64,
    t1: f64,
    x1: f64,
}

impl RecordSegment {
    #[inline]
    fn tau(&self, y: f64) -> f64 {
        let c = &self.cell;
        crossing_time(c.t0, c.x0, c.t1, c.x1, y)
    }

    /// `dτ/dy` on this segment.
    #[inline]
    fn slope(&self) -> f64 {
        let c = &self.cell;
        (c.t1 - c.t0) / (c.x1 - c.x0)
    }
}

/// Jump of `τ` at a stalled maximum `level`: `τ_level = tau_minus`,
/// `τ_{level+} = tau_plus`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JumpAtom {
    pub level: f64,
    pub tau_minus: f64,
    pub tau_plus: f64,
}

/// Pathwise hitting-time profile over `(0, s_max]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HittingProfile {
    pub s_max: f64,
    pub segments: Vec<RecordSegment>,
    pub atoms: Vec<JumpAtom>,
    /// First attainment of `s_max`; from here to `t_max` the maximum is stalled.
    #[serde(skip)]
    stall_start: f64,
    #[serde(skip)]
    t_max: f64,
}

/// Sweeps the path once, tracking the running maximum `m` and the time it was
/// first attained. A cell whose end exceeds `m` yields a record segment from
/// the crossing of `m` onwards; if `m` had stalled before that crossing, the
/// stall becomes an atom. Ties with `m` count as stalling, and the atom opens
/// at the first attainment.
pub fn build_profile(path: &Path) -> HittingProfile {
    let v = path.values();
    let grid = path.grid();
    let mut m = v[0];
    let mut attained = 0.0;
    let mut segments = Vec::new();
    let mut atoms = Vec::new();
    for i in 1..v.len() {
        let (x0, x1) = (v[i - 1], v[i]);
        if x1 <= m {
            continue;
        }
        let cell = Chord {
            t0: grid.node(i - 1),
            x0,
            t1: grid.node(i),
            x1,
        };
        let t_star = if x0 >= m {
            cell.t0
        } else {
            crossing_time(cell.t0, x0, cell.t1, x1, m)
        };
        if m > 0.0 && t_star > attained {
            atoms.push(JumpAtom {
                level: m,
                tau_minus: attained,
                tau_plus: t_star,
            });
        }
        segments.push(RecordSegment {
            y_lo: m,
            y_hi: x1,
            t_lo: t_star,
            t_hi: cell.t1,
            cell,
        });
        m = x1;
        attained = cell.t1;
    }
    HittingProfile {
        s_max: m,
        segments,
        atoms,
        stall_start: attained,
        t_max: grid.t_max(),
    }
}

/// Integrand of a Stieltjes integral in `dτ_y`.
///
/// On record segments `τ_{y+} = τ_y` and only the diagonal value is needed;
/// across an atom the integrand is averaged over the bridge
/// `u = z τ_{y+} + (1 - z) τ_y`, `z ∈ [0, 1]`.
pub trait StieltjesIntegrand {
    fn on_record(&self, y: f64, tau: f64) -> f64;
    fn on_jump(&self, y: f64, z: f64, tau_minus: f64, tau_plus: f64) -> f64;
}

/// Closures `g(y, τ_y, τ_{y+})` that ignore the bridge parameter.
impl<F: Fn(f64, f64, f64) -> f64> StieltjesIntegrand for F {
    fn on_record(&self, y: f64, tau: f64) -> f64 {
        self(y, tau, tau)
    }

    fn on_jump(&self, y: f64, _z: f64, tau_minus: f64, tau_plus: f64) -> f64 {
        self(y, tau_minus, tau_plus)
    }
}

impl HittingProfile {
    /// `τ_{0+}`: the first time the path becomes positive.
    pub fn tau_zero_plus(&self) -> Option<f64> {
        self.segments.first().map(|s| s.t_lo)
    }

    /// The final stall `[first attainment of s_max, t_max]`, when nonempty.
    /// Its end is censored: `τ_{s_max+}` lies beyond the horizon.
    pub fn open_stall(&self) -> Option<(f64, f64)> {
        (self.s_max > 0.0 && self.stall_start < self.t_max).then_some((self.stall_start, self.t_max))
    }

    fn check_level(&self, y: f64) -> Result<()> {
        if y > 0.0 && y <= self.s_max {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                level: y,
                s_max: self.s_max,
            })
        }
    }

    /// Index of the segment with `y_lo < y <= y_hi`.
    fn segment_index(&self, y: f64) -> usize {
        self.segments.partition_point(|s| s.y_hi < y)
    }

    /// `(τ_y, τ_{y+})`; the two differ only at atom levels. At `s_max` the
    /// right limit is censored and `τ_y` is returned for both.
    pub fn tau_at(&self, y: f64) -> Result<(f64, f64)> {
        self.check_level(y)?;
        let k = self.segment_index(y);
        let seg = &self.segments[k];
        let minus = seg.tau(y);
        let plus = if y == seg.y_hi {
            self.segments.get(k + 1).map_or(minus, |next| next.t_lo)
        } else {
            minus
        };
        Ok((minus, plus))
    }

    /// `∫_0^a f(y, τ_y) dy`, 16-point Gauss–Legendre on each record segment.
    /// Atom levels carry no `dy` mass.
    pub fn integrate_dy<F: Fn(f64, f64) -> f64>(&self, a: f64, f: F) -> Result<f64> {
        self.check_level(a)?;
        let rule = gl16();
        let mut total = 0.0;
        for seg in self.segments.iter().take_while(|s| s.y_lo < a) {
            let hi = seg.y_hi.min(a);
            total += rule.integrate(seg.y_lo, hi, |y| f(y, seg.tau(y)));
        }
        Ok(total)
    }

    /// Stieltjes integral `∫_{(0, a]} g dτ_y`: record segments contribute
    /// `∫ g(y, τ_y) (dτ/dy) dy` and every atom with level `<= a` contributes
    /// `(τ_{y+} - τ_y) ∫_0^1 g_z dz`, both by 16-point Gauss–Legendre.
    pub fn integrate_dtau<G: StieltjesIntegrand + ?Sized>(&self, a: f64, g: &G) -> Result<f64> {
        self.check_level(a)?;
        let rule = gl16();
        let mut total = 0.0;
        for seg in self.segments.iter().take_while(|s| s.y_lo < a) {
            let hi = seg.y_hi.min(a);
            let slope = seg.slope();
            total += slope * rule.integrate(seg.y_lo, hi, |y| g.on_record(y, seg.tau(y)));
        }
        for atom in self.atoms.iter().take_while(|at| at.level <= a) {
            total += Self::bridge_integral(atom.level, atom.tau_minus, atom.tau_plus, g);
        }
        Ok(total)
    }

    /// `(t1 - t0) ∫_0^1 g.on_jump(level, z, t0, t1) dz`.
    pub fn bridge_integral<G: StieltjesIntegrand + ?Sized>(level: f64, t0: f64, t1: f64, g: &G) -> f64 {
        (t1 - t0) * gl16().integrate(0.0, 1.0, |z| g.on_jump(level, z, t0, t1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::Grid;

    fn example() -> Path {
        Path::new(Grid::new(3.0, 3).unwrap(), vec![0.0, 0.5, 0.3, 0.8]).unwrap()
    }

    #[test]
    fn first_hit_examples() {
        let p = example();
        let h = first_hit(&p, 0.6).unwrap();
        assert!(h.hit);
        assert!((h.tau.unwrap() - 2.6).abs() < 1e-12);
        assert_eq!(h.grid_index, Some(3));
        assert!(!first_hit(&p, 0.9).unwrap().hit);
        assert_eq!(first_hit(&p, 0.5).unwrap().tau, Some(1.0));
        assert!(first_hit(&p, 0.0).is_err());
        assert!(first_hit(&p, -1.0).is_err());
    }

    #[test]
    fn profile_example() {
        let prof = build_profile(&example());
        assert_eq!(prof.s_max, 0.8);
        assert_eq!(prof.segments.len(), 2);
        let s0 = prof.segments[0];
        assert_eq!((s0.y_lo, s0.y_hi, s0.t_lo, s0.t_hi), (0.0, 0.5, 0.0, 1.0));
        assert_eq!(prof.atoms.len(), 1);
        let at = prof.atoms[0];
        assert_eq!((at.level, at.tau_minus), (0.5, 1.0));
        assert!((at.tau_plus - 2.4).abs() < 1e-12);
        let s1 = prof.segments[1];
        assert_eq!((s1.y_lo, s1.y_hi, s1.t_hi), (0.5, 0.8, 3.0));
        assert!((s1.t_lo - 2.4).abs() < 1e-12);
        let total: f64 = prof.segments.iter().map(|s| s.t_hi - s.t_lo).sum::<f64>()
            + prof.atoms.iter().map(|a| a.tau_plus - a.tau_minus).sum::<f64>();
        assert!((total - 3.0).abs() < 1e-12);
        assert_eq!(prof.open_stall(), None);
    }

    #[test]
    fn increasing_path_has_no_atoms() {
        let p = Path::new(Grid::new(1.0, 4).unwrap(), vec![0.0, 0.1, 0.3, 0.35, 0.9]).unwrap();
        let prof = build_profile(&p);
        assert!(prof.atoms.is_empty());
        assert_eq!(prof.segments.len(), 4);
        assert_eq!(prof.segments[0].y_lo, 0.0);
        assert_eq!(prof.segments.last().unwrap().y_hi, 0.9);
    }

    #[test]
    fn unreturned_maximum_has_no_atom() {
        let p = Path::new(Grid::new(3.0, 3).unwrap(), vec![0.0, 1.0, 0.2, 0.9]).unwrap();
        let prof = build_profile(&p);
        assert_eq!(prof.s_max, 1.0);
        assert_eq!(prof.segments.len(), 1);
        assert!(prof.atoms.is_empty());
        assert_eq!(prof.open_stall(), Some((1.0, 3.0)));
    }

    #[test]
    fn ties_open_atom_at_first_attainment() {
        let p = Path::new(Grid::new(4.0, 4).unwrap(), vec![0.0, 0.5, 0.5, 0.5, 0.7]).unwrap();
        let prof = build_profile(&p);
        assert_eq!(prof.atoms, vec![JumpAtom { level: 0.5, tau_minus: 1.0, tau_plus: 3.0 }]);
        assert_eq!(prof.tau_at(0.5).unwrap(), (1.0, 3.0));
    }

    #[test]
    fn negative_start_shifts_zero_plus() {
        let p = Path::new(Grid::new(3.0, 3).unwrap(), vec![0.0, -1.0, 1.0, 0.5]).unwrap();
        let prof = build_profile(&p);
        assert!(prof.atoms.is_empty());
        assert_eq!(prof.tau_zero_plus(), Some(1.5));
    }

    #[test]
    fn tau_at_examples() {
        let prof = build_profile(&example());
        let (m, p) = prof.tau_at(0.5).unwrap();
        assert_eq!(m, 1.0);
        assert!((p - 2.4).abs() < 1e-12);
        assert_eq!(prof.tau_at(0.25).unwrap(), (0.5, 0.5));
        assert_eq!(prof.tau_at(0.8).unwrap(), (3.0, 3.0));
        assert!(prof.tau_at(0.9).is_err());
        assert!(prof.tau_at(0.0).is_err());
    }

    #[test]
    fn integrate_dy_examples() {
        let prof = build_profile(&example());
        assert!((prof.integrate_dy(0.8, |_, _| 1.0).unwrap() - 0.8).abs() < 1e-14);
        let step = prof
            .integrate_dy(0.8, |y, _| if y > 0.5 { 1.0 } else { 0.0 })
            .unwrap();
        assert!((step - 0.3).abs() < 1e-14);
        let diag = Path::new(Grid::new(1.0, 8).unwrap(), (0..=8).map(|i| i as f64 / 8.0).collect()).unwrap();
        let prof = build_profile(&diag);
        assert!((prof.integrate_dy(1.0, |_, tau| tau).unwrap() - 0.5).abs() < 1e-14);
        assert!(prof.integrate_dy(1.5, |_, _| 1.0).is_err());
    }

    #[test]
    fn integrate_dtau_examples() {
        let prof = build_profile(&example());
        let one = |_: f64, _: f64, _: f64| 1.0;
        assert!((prof.integrate_dtau(0.8, &one).unwrap() - 3.0).abs() < 1e-12);
        assert!((prof.integrate_dtau(0.5, &one).unwrap() - 2.4).abs() < 1e-12);
        let diag = Path::new(Grid::new(1.0, 8).unwrap(), (0..=8).map(|i| i as f64 / 8.0).collect()).unwrap();
        let prof = build_profile(&diag);
        let level = |y: f64, _: f64, _: f64| y;
        assert!((prof.integrate_dtau(1.0, &level).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn bridge_uses_z() {
        struct Bridge;
        impl StieltjesIntegrand for Bridge {
            fn on_record(&self, _: f64, _: f64) -> f64 {
                0.0
            }
            fn on_jump(&self, _: f64, z: f64, _: f64, _: f64) -> f64 {
                z * z
            }
        }
        let prof = build_profile(&example());
        // atom length 1.4 times ∫_0^1 z² dz
        let v = prof.integrate_dtau(0.8, &Bridge).unwrap();
        assert!((v - 1.4 / 3.0).abs() < 1e-12);
    }
}
