use gphit_core::hitting::{build_profile, first_hit, HittingProfile};
use gphit_core::simulate::{Grid, Path};
use proptest::prelude::*;

/// Paths with either continuous values or values on a coarse lattice, the
/// latter to produce ties and repeated maxima.
fn paths() -> impl Strategy<Value = Path> {
    let continuous = prop::collection::vec(-2.0f64..2.0, 3..60);
    let lattice = prop::collection::vec((-8i32..8).prop_map(|k| k as f64 * 0.25), 3..60);
    (prop_oneof![continuous, lattice], 0.5f64..50.0).prop_map(|(mut v, t_max)| {
        v[0] = 0.0;
        let n = v.len() - 1;
        Path::new(Grid::new(t_max, n).unwrap(), v).unwrap()
    })
}

fn levels(prof: &HittingProfile, fracs: &[f64]) -> Vec<f64> {
    fracs.iter().map(|f| f * prof.s_max).filter(|&y| y > 0.0).collect()
}

fn tol(p: &Path) -> f64 {
    1e-12 * p.grid().t_max()
}

proptest! {
    #[test]
    fn profile_covers_time_after_zero_plus(p in paths()) {
        let prof = build_profile(&p);
        prop_assume!(prof.s_max > 0.0);
        let seg: f64 = prof.segments.iter().map(|s| s.t_hi - s.t_lo).sum();
        let atoms: f64 = prof.atoms.iter().map(|a| a.tau_plus - a.tau_minus).sum();
        let stall = prof.open_stall().map_or(0.0, |(a, b)| b - a);
        let covered = seg + atoms + stall;
        let expected = p.grid().t_max() - prof.tau_zero_plus().unwrap();
        prop_assert!((covered - expected).abs() <= tol(&p), "{covered} vs {expected}");
    }

    #[test]
    fn segments_and_atoms_interlock(p in paths()) {
        let prof = build_profile(&p);
        prop_assume!(prof.s_max > 0.0);
        let segs = &prof.segments;
        prop_assert_eq!(segs[0].y_lo, 0.0);
        prop_assert_eq!(segs[segs.len() - 1].y_hi, prof.s_max);
        for w in segs.windows(2) {
            prop_assert_eq!(w[0].y_hi, w[1].y_lo);
            prop_assert!(w[0].t_hi <= w[1].t_lo);
        }
        for s in segs {
            prop_assert!(s.y_lo < s.y_hi && s.t_lo <= s.t_hi);
        }
        for a in &prof.atoms {
            prop_assert!(a.tau_minus < a.tau_plus);
            let k = segs.iter().position(|s| s.y_hi == a.level).unwrap();
            prop_assert_eq!(segs[k].t_hi, a.tau_minus);
            prop_assert_eq!(segs[k + 1].t_lo, a.tau_plus);
        }
    }

    #[test]
    fn tau_is_nondecreasing_and_matches_first_hit(p in paths(), fr in prop::collection::vec(0.0f64..=1.0, 1..20)) {
        let prof = build_profile(&p);
        prop_assume!(prof.s_max > 0.0);
        let mut ys = levels(&prof, &fr);
        ys.push(prof.s_max);
        ys.sort_by(f64::total_cmp);
        let mut last = f64::NEG_INFINITY;
        for &y in &ys {
            let (m, plus) = prof.tau_at(y).unwrap();
            prop_assert!(m >= last && plus >= m);
            last = plus;
            let hit = first_hit(&p, y).unwrap();
            prop_assert!(hit.hit);
            prop_assert_eq!(hit.tau.unwrap(), m);
        }
        prop_assert!(!first_hit(&p, prof.s_max * (1.0 + 1e-9) + 1e-300).unwrap().hit);
    }

    #[test]
    fn stieltjes_measure_of_an_interval(p in paths(), fa in 0.0f64..=1.0, fb in 0.0f64..=1.0) {
        let prof = build_profile(&p);
        prop_assume!(prof.s_max > 0.0);
        let (a, b) = {
            let (lo, hi) = if fa < fb { (fa, fb) } else { (fb, fa) };
            (lo * prof.s_max, hi * prof.s_max)
        };
        prop_assume!(a > 0.0 && b > 0.0);
        let one = |_: f64, _: f64, _: f64| 1.0;
        let ia = prof.integrate_dtau(a, &one).unwrap();
        let ib = prof.integrate_dtau(b, &one).unwrap();
        let (_, plus_a) = prof.tau_at(a).unwrap();
        let (_, plus_b) = prof.tau_at(b).unwrap();
        let zero = prof.tau_zero_plus().unwrap();
        // at s_max the right limit is censored and reported as τ_{s_max}
        prop_assert!((ia - (plus_a - zero)).abs() <= tol(&p));
        prop_assert!((ib - ia - (plus_b - plus_a)).abs() <= tol(&p));
        let dy = prof.integrate_dy(b, |_, _| 1.0).unwrap();
        prop_assert!((dy - b).abs() <= 1e-12 * b.max(1.0));
    }

    #[test]
    fn path_reaches_each_level_at_its_record_time(p in paths(), fr in prop::collection::vec(0.0f64..=1.0, 1..10)) {
        let prof = build_profile(&p);
        prop_assume!(prof.s_max > 0.0);
        for y in levels(&prof, &fr) {
            let (m, _) = prof.tau_at(y).unwrap();
            prop_assert!((p.value_at(m) - y).abs() <= 1e-9 * (1.0 + y.abs()));
            prop_assert!(p.running_max(m) <= y + 1e-9 * (1.0 + y));
        }
    }
}

#[test]
fn nonpositive_paths_have_empty_profiles() {
    let p = Path::new(Grid::new(1.0, 3).unwrap(), vec![0.0, -0.5, 0.0, -1.0]).unwrap();
    let prof = build_profile(&p);
    assert_eq!(prof.s_max, 0.0);
    assert!(prof.segments.is_empty() && prof.atoms.is_empty());
    assert_eq!(prof.tau_zero_plus(), None);
    assert_eq!(prof.open_stall(), None);
    assert!(prof.tau_at(0.1).is_err());
    assert!(!first_hit(&p, 0.1).unwrap().hit);
}

#[test]
fn profile_serializes_segments_and_atoms() {
    let p = Path::new(Grid::new(3.0, 3).unwrap(), vec![0.0, 0.5, 0.3, 0.8]).unwrap();
    let v = serde_json::to_value(build_profile(&p)).unwrap();
    assert_eq!(v["segments"].as_array().unwrap().len(), 2);
    assert_eq!(v["atoms"].as_array().unwrap().len(), 1);
    assert_eq!(v["atoms"][0]["level"], 0.5);
}
