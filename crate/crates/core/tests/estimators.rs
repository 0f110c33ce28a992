use std::f64::consts::PI;

use gphit_core::estimators::{
    divergence_integral, exponential_functional, hitting_identity_refinement, hitting_identity_residual, ibp_residual,
    laplace_hitting, laplace_hitting_grid, negative_moment, positive_moment_divergence, tail_exponent, McConfig,
};
use gphit_core::oracles::{bm_laplace, indep_incr_laplace, FormulaId};
use gphit_core::quadrature::adaptive;
use gphit_core::simulate::{plan, sample_path, Grid, SamplerChoice};
use gphit_core::stats::mean_stderr;
use gphit_core::{Error, Kernel};

fn grid(t_max: f64, n: usize) -> Grid {
    Grid::new(t_max, n).unwrap()
}

fn seed(k: u64) -> u64 {
    k << 40
}

#[test]
fn worker_count_does_not_change_any_bit() {
    let k = Kernel::fbm(0.7).unwrap();
    let one = McConfig::new(64, seed(1), grid(20.0, 256));
    let three = one.with_workers(3);
    assert_eq!(laplace_hitting(&k, 0.8, 1.0, &one).unwrap(), laplace_hitting(&k, 0.8, 1.0, &three).unwrap());
    assert_eq!(
        hitting_identity_residual(&k, 0.5, 1.0, &one).unwrap(),
        hitting_identity_residual(&k, 0.5, 1.0, &three).unwrap()
    );
    assert_eq!(negative_moment(&k, 1.0, 1.0, &one).unwrap(), negative_moment(&k, 1.0, 1.0, &three).unwrap());
    let g = grid(1.0, 64);
    assert_eq!(
        ibp_residual(&k, 1.0, 0.5, 0.8, 0.5, &one.with_grid(g)).unwrap(),
        ibp_residual(&k, 1.0, 0.5, 0.8, 0.5, &three.with_grid(g)).unwrap()
    );
    let probes = [0.2, 1.0, 5.0, 20.0];
    let big = McConfig::new(1_000, seed(2), grid(20.0, 256));
    assert_eq!(
        tail_exponent(&k, 2.0, &probes, &big).unwrap(),
        tail_exponent(&k, 2.0, &probes, &big.with_workers(4)).unwrap()
    );
}

#[test]
fn laplace_grid_is_monotone_in_alpha_and_level() {
    let k = Kernel::fbm(0.7).unwrap();
    let cfg = McConfig::new(500, seed(3), grid(10.0, 512));
    let table = laplace_hitting_grid(&k, &[0.5, 1.0], &[0.25, 0.5, 1.0, 2.0], &cfg).unwrap();
    for row in &table {
        for w in row.windows(2) {
            assert!(w[1].mean <= w[0].mean);
        }
    }
    for (lo, hi) in table[0].iter().zip(&table[1]) {
        assert!(hi.mean <= lo.mean);
    }
    assert_eq!(table[1][2], laplace_hitting(&k, 1.0, 1.0, &cfg).unwrap());
}

#[test]
fn brownian_laplace_close_to_closed_form() {
    let cfg = McConfig::new(20_000, seed(4), grid(10.0, 4096));
    let e = laplace_hitting(&Kernel::StandardBrownian, 1.0, 1.0, &cfg).unwrap();
    // discrete monitoring delays τ; allowance for that bias at this mesh
    assert!((e.mean - bm_laplace(1.0, 1.0)).abs() <= 4.0 * e.stderr + 0.02, "{e:?}");
    assert!(e.truncation_bound < 1e-4);
}

#[test]
fn independent_increment_laplace_close_to_closed_form() {
    let k = Kernel::indep_power(1.0, 2.0).unwrap();
    let cfg = McConfig::new(20_000, seed(5), grid(4.0, 4096));
    let lambda = 1.5f64;
    let e = laplace_hitting(&k, 1.0, 0.5 * lambda * lambda, &cfg).unwrap();
    assert!((e.mean - indep_incr_laplace(1.0, lambda)).abs() <= 4.0 * e.stderr + 0.02, "{e:?}");
}

#[test]
fn truncation_bound_covers_censored_paths() {
    let k = Kernel::StandardBrownian;
    let cfg = McConfig::new(2_000, seed(6), grid(1.0, 256));
    let alpha = 0.5;
    let e = laplace_hitting(&k, 1.0, alpha, &cfg).unwrap();
    assert!(e.censored_count > 0);
    let frac = e.censored_count as f64 / 2_000.0;
    assert!(e.truncation_bound >= frac * (-alpha * 1.0f64).exp());
    let m = negative_moment(&k, 1.0, 1.0, &cfg).unwrap();
    assert!(m.truncation_bound >= frac * 1.0);
}

#[test]
fn negative_moment_of_order_zero_is_the_hit_fraction() {
    let cfg = McConfig::new(1_000, seed(7), grid(2.0, 256));
    let e = negative_moment(&Kernel::fbm(0.7).unwrap(), 1.0, 1e-9, &cfg).unwrap();
    let hit = 1.0 - e.censored_count as f64 / 1_000.0;
    assert!((e.mean - hit).abs() < 1e-6);
}

/// `∫_0^a E M_{τ_y} dy` for `X_t = Y t` by nested quadrature over `Y > 0`.
fn linear_identity_lhs(a: f64, lambda: f64) -> f64 {
    let inner = |yy: f64| adaptive(|y| (lambda * y - 0.5 * lambda * lambda * y * y / (yy * yy)).exp(), 0.0, a, 1e-12, 1e-15);
    let dens = |yy: f64| (-0.5 * yy * yy).exp() / (2.0 * PI).sqrt();
    let head = adaptive(|yy| if yy > 0.0 { inner(yy) * dens(yy) } else { 0.0 }, 0.0, 1.0, 1e-11, 1e-15);
    let tail = adaptive(
        |v| if v > 0.0 { inner(1.0 / v) * dens(1.0 / v) / (v * v) } else { 0.0 },
        0.0,
        1.0,
        1e-11,
        1e-15,
    );
    head + tail
}

#[test]
fn identity_for_the_linear_kernel_matches_quadrature() {
    let (a, lambda) = (0.5, 1.0);
    let target = linear_identity_lhs(a, lambda);
    let cfg = McConfig::new(200_000, seed(8), grid(100.0, 16));
    let r = hitting_identity_residual(&Kernel::Linear, a, lambda, &cfg).unwrap();
    assert!((r.lhs - target).abs() <= 4.0 * r.lhs_stderr, "lhs {} vs {target}", r.lhs);
    assert!((r.rhs - target).abs() <= 4.0 * r.rhs_stderr, "rhs {} vs {target}", r.rhs);
    assert!(r.residual.abs() <= 4.0 * r.stderr);
    assert_eq!(r.residual, r.lhs - r.rhs);
}

#[test]
fn identity_refinement_levels_follow_factors() {
    let k = Kernel::fbm(0.75).unwrap();
    let cfg = McConfig::new(200, seed(9), grid(10.0, 1024));
    let levels = hitting_identity_refinement(&k, 0.5, 1.0, &cfg, &[16, 4, 1]).unwrap();
    let ns: Vec<usize> = levels.iter().map(|r| r.diagnostics.grid_n).collect();
    assert_eq!(ns, vec![64, 256, 1024]);
    // the finest level is the plain estimator
    assert_eq!(levels[2], hitting_identity_residual(&k, 0.5, 1.0, &cfg).unwrap());
    assert!(hitting_identity_refinement(&k, 0.5, 1.0, &cfg, &[3]).is_err());
}

#[test]
fn identity_rejects_zero_lambda_and_negative_lambda_with_censoring() {
    let k = Kernel::fbm(0.75).unwrap();
    let cfg = McConfig::new(200, seed(10), grid(10.0, 256));
    assert!(matches!(hitting_identity_residual(&k, 0.5, 0.0, &cfg), Err(Error::InvalidArgument(_))));
    assert!(matches!(hitting_identity_residual(&k, 0.5, -1.0, &cfg), Err(Error::CensoringExcess(_))));
}

#[test]
fn ibp_for_the_linear_kernel_matches_closed_form() {
    let cfg = McConfig::new(50_000, seed(11), grid(1.0, 8));
    let r = ibp_residual(&Kernel::Linear, 1.0, 0.5, 0.8, 0.5, &cfg).unwrap();
    let o = r.oracle.unwrap();
    assert_eq!(o.formula_id, FormulaId::GaussianMgfIbp);
    assert!((r.lhs - o.value).abs() <= 4.0 * r.lhs_stderr);
    assert!((r.rhs - o.value).abs() <= 4.0 * r.rhs_stderr);
}

#[test]
fn ibp_vanishes_as_t_shrinks() {
    let k = Kernel::fbm(0.75).unwrap();
    let g = grid(1.0, 1024);
    let cfg = McConfig::new(2_000, seed(12), g);
    let r = ibp_residual(&k, g.node(1), 0.5, 0.8, 0.5, &cfg).unwrap();
    assert!(r.lhs.abs() < 0.01 && r.rhs.abs() < 0.01, "{r:?}");
}

#[test]
fn exponential_functional_has_unit_mean() {
    let k = Kernel::fbm(0.75).unwrap();
    let p = plan(&k, &grid(1.0, 128), SamplerChoice::Auto).unwrap();
    let reps = 20_000u64;
    let mut m = Vec::new();
    let mut d = Vec::new();
    for i in 0..reps {
        let path = sample_path(&p, seed(13), i);
        m.push(exponential_functional(&k, &path, 0.7, 0.8).unwrap());
        d.push(divergence_integral(&k, &path, 0.7, 0.8).unwrap());
    }
    let (mm, ms) = mean_stderr(&m);
    let (dm, ds) = mean_stderr(&d);
    assert!((mm - 1.0).abs() <= 4.0 * ms, "{mm} ± {ms}");
    assert!(dm.abs() <= 4.0 * ds, "{dm} ± {ds}");
}

#[test]
fn positive_moment_schedule() {
    let k = Kernel::fbm(0.7).unwrap();
    let sched = [grid(5.0, 128), grid(50.0, 1280)];
    let cfg = McConfig::new(300, seed(14), sched[0]);
    let s = positive_moment_divergence(&k, 1.0, 0.5, &cfg, &sched).unwrap();
    assert!(s.strictly_increasing);
    assert_eq!(s.lower_bound, None);
    let s = positive_moment_divergence(&k, 1.0, 0.25, &cfg, &sched).unwrap();
    assert!(s.lower_bound.unwrap() > 0.0);
    assert!(positive_moment_divergence(&k, 1.0, 0.5, &cfg, &[sched[1], sched[0]]).is_err());
    assert!(positive_moment_divergence(&k, 1.0, 1.0, &cfg, &sched).is_err());
    assert!(positive_moment_divergence(&k, 1.0, 0.0, &cfg, &sched).is_err());
}

#[test]
fn tail_fit_recovers_brownian_exponent_roughly() {
    let cfg = McConfig::new(3_000, seed(15), grid(100.0, 8192));
    let probes = [1.0, 3.0, 10.0, 30.0, 100.0];
    let fit = tail_exponent(&Kernel::StandardBrownian, 0.5, &probes, &cfg).unwrap();
    assert!((-0.65..=-0.35).contains(&fit.slope), "{fit:?}");
    assert_eq!(fit.points.len() + fit.dropped.len(), 5);
}
