use super::builtin::*;
use super::*;
use proptest::prelude::*;

fn fin(v: ExtendedReal) -> f64 {
    v.finite().expect("finite value")
}

#[test]
fn example1_values_and_shift_periodicity() {
    let f = example1(4.0, 4.0).unwrap();
    assert_eq!(fin(f.eval(0.2)), 1.6);
    assert_eq!(fin(f.eval(0.25)), 2.0);
    assert!((fin(f.eval(0.3)) - 1.7).abs() < 1e-15);
    assert!((fin(f.eval(0.9)) - 0.2).abs() < 1e-15);
    assert!((fin(f.eval(1.2)) - 2.6).abs() < 1e-15);
    assert!((fin(f.eval(-0.8)) - 0.6).abs() < 1e-15);
    assert_eq!(f.branches().len(), 3);
}

#[test]
fn example1_breakpoint_values_follow_closed_forms() {
    let f = example1(0.01, 0.02).unwrap();
    assert_eq!(fin(f.eval(0.25)), 1.0025);
    assert_eq!(fin(f.eval(0.5)), 0.5);
    assert_eq!(fin(f.eval(0.75)), -0.005);
    assert_eq!(fin(f.eval(0.0)), 0.0);
    assert_eq!(fin(f.eval(1.0)), 1.0);
}

#[test]
fn example2_singularities_and_fixed_ends() {
    let f = example2(1.0).unwrap();
    assert!((example2_constant(1.0) - 3.0 / 16.0).abs() < 1e-16);
    assert!(fin(f.eval(0.0)).abs() < 1e-15);
    assert!((fin(f.eval(1.0 - 1e-17)) - 1.0).abs() < 1e-12);
    assert!((fin(f.eval(0.5)) - 0.5).abs() < 1e-15);
    assert_eq!(f.eval(0.25), ExtendedReal::NegInf);
    assert_eq!(f.eval(0.75), ExtendedReal::PosInf);
    assert_eq!(f.eval(1.75), ExtendedReal::PosInf);
    // Both sides of each singularity diverge the same way.
    assert!(fin(f.eval(0.25 - 1e-9)) < -1e7);
    assert!(fin(f.eval(0.25 + 1e-9)) < -1e7);
    assert!(fin(f.eval(0.75 - 1e-9)) > 1e7);
    assert!(fin(f.eval(0.75 + 1e-9)) > 1e7);
    assert_eq!(f.eval_restricted(0.25), 0.0);
}

#[test]
fn example2_tails_keep_precision_in_local_coordinates() {
    let f = example2(10.0).unwrap();
    let b = &f.branches()[1];
    let v = b.eval_coord(BranchCoord::FromHi(1e-200)).to_f64();
    let c = example2_constant(10.0);
    let expect = c * (1e20 - libm::pow(0.5, -0.1)) + 0.5;
    assert!((v - expect).abs() / expect < 1e-14);
}

#[test]
fn climbing_sine_invariance_threshold_matches_reference() {
    let a = climbing_sine_invariance_threshold();
    assert!((a - 0.732644).abs() < 5e-7, "{a}");
    let (_, hi) = climbing_sine(0.5).unwrap().image_bounds();
    assert!(fin(hi) <= 1.0);
    let (lo, hi) = climbing_sine(0.74).unwrap().image_bounds();
    assert!(fin(hi) > 1.0 && fin(lo) < 0.0);
}

#[test]
fn climbing_tangent_values() {
    let f = climbing_tangent(0.5).unwrap();
    for &x in &[0.1, 0.3, 0.45, 0.6, 0.9] {
        let direct = x + 0.5 * libm::tan(2.0 * math::PI * x);
        assert!((fin(f.eval(x)) - direct).abs() < 1e-12, "{x}");
    }
    assert_eq!(f.eval(0.25), ExtendedReal::NegInf);
}

#[test]
fn pomeau_manneville_is_odd_symmetric() {
    let f = pomeau_manneville(6.0, 2.0, 0.0).unwrap();
    assert!((fin(f.eval(0.25)) - (0.25 + 6.0 / 16.0)).abs() < 1e-15);
    for &x in &[0.1, 0.2, 0.4, 0.49] {
        assert!((fin(f.eval(1.0 - x)) - (1.0 - fin(f.eval(x)))).abs() < 1e-14);
    }
    assert_eq!(f.branches()[0].right_limit(), ExtendedReal::Finite(2.0));
}

#[test]
fn conjugated_example1_matches_its_definition() {
    let f = conjugated_example1().unwrap();
    let g = example1(4.0, 4.0).unwrap();
    for &u in &[0.05, 0.2, 0.3, 0.6, 0.8, 0.95] {
        let gu = fin(g.eval(u));
        let (k, r) = math::split_floor(gu);
        let expect = conjugating_h(r) + k;
        assert!((fin(f.eval(conjugating_h(u))) - expect).abs() < 1e-13);
    }
    assert!((conjugating_h_inv(conjugating_h(0.37)) - 0.37).abs() < 1e-16);
}

#[test]
fn validation_accepts_integer_spike_maps() {
    for f in [
        example1(4.0, 4.0).unwrap(),
        example1(0.0, 0.0).unwrap(),
        example2(1.0).unwrap(),
        example2(10.0).unwrap(),
        climbing_tangent(0.5).unwrap(),
        pomeau_manneville(6.0, 2.0, 0.0).unwrap(),
        conjugated_example1().unwrap(),
    ] {
        let r = validate(&f, 2000, 1e-12).unwrap();
        assert!(r.has_integer_spikes, "{}: {:?}", f.name(), r.violations);
    }
}

#[test]
fn validation_rejects_overshooting_spikes() {
    let r = validate(&example1(0.01, 0.01).unwrap(), 1000, 1e-12).unwrap();
    assert!(r.is_shift_periodic);
    assert!(!r.has_integer_spikes);
    let v = r.violations.iter().find(|v| v.condition == Condition::IntegerLimit).unwrap();
    assert_eq!(v.witness, 0.25);
}

#[test]
fn validation_rejects_non_integer_limits() {
    let r = validate(&nonint_example(1.0).unwrap(), 1000, 1e-12).unwrap();
    assert!(r.is_shift_periodic);
    assert!(r.violates(Condition::IntegerLimit));
    assert!(!r.has_integer_spikes);
}

#[test]
fn validation_detects_contraction_near_critical_points() {
    let r = validate(&climbing_sine(0.5).unwrap(), 1000, 1e-12).unwrap();
    assert!(r.violates(Condition::Expansion));
    assert!(!r.has_integer_spikes);
}

#[test]
fn validation_detects_wrong_declared_limits() {
    let b = MonotoneBranch::from_fn(0.0, 1.0, Orientation::Increasing, ExtendedReal::Finite(0.0), ExtendedReal::Finite(3.0), |p| 2.0 * p.x).unwrap();
    let f = ShiftPeriodicMap::new("bad", Vec::new(), alloc::vec![b]).unwrap();
    let r = validate(&f, 100, 1e-12).unwrap();
    assert!(r.violates(Condition::LimitConsistency));
    assert!(!r.is_shift_periodic);
}

#[test]
fn cover_errors() {
    let b = MonotoneBranch::affine(0.0, 0.5, 2.0, 0.0).unwrap();
    assert!(matches!(ShiftPeriodicMap::new("x", Vec::new(), alloc::vec![b]), Err(Error::Cover(_))));
    assert!(matches!(example2(0.0), Err(Error::InvalidParameter { .. })));
    assert!(matches!(by_name("nope", &[]), Err(Error::InvalidParameter { .. })));
    assert!(matches!(by_name("example2", &[("eps", 1.0)]), Err(Error::InvalidParameter { .. })));
}

#[test]
fn solve_inverts_branches() {
    let f = example2(1.0).unwrap();
    let b = &f.branches()[1];
    for &y in &[-1e6, -3.0, 0.0, 0.5, 7.0, 1e9] {
        let c = b.solve(y).unwrap();
        let v = b.eval_coord(c).to_f64();
        assert!((v - y).abs() <= 1e-9 * (1.0 + y.abs()), "{y} {v}");
    }
    assert!(b.solve(f64::INFINITY).is_err());
}

proptest! {
    #[test]
    fn eval_is_shift_periodic(i in 0u32..(1 << 20), k in -50i32..50, which in 0usize..4) {
        let f = match which {
            0 => example1(0.3, 0.1).unwrap(),
            1 => example2(2.0).unwrap(),
            2 => climbing_sine(0.9).unwrap(),
            _ => pomeau_manneville(2.0, 3.0, 0.1).unwrap(),
        };
        // Dyadic points keep x + k exact.
        let x = i as f64 / (1u32 << 20) as f64;
        let base = f.eval(x);
        let shifted = f.eval(x + k as f64);
        match base {
            ExtendedReal::Finite(v) => prop_assert_eq!(fin(shifted), v + k as f64),
            other => prop_assert_eq!(shifted, other),
        }
    }

    #[test]
    fn restricted_map_lands_in_unit_interval(x in 0.0f64..=1.0, kappa in 0.3f64..12.0) {
        let f = example2(kappa).unwrap();
        let r = f.eval_restricted(x);
        prop_assert!((0.0..1.0).contains(&r));
    }

    #[test]
    fn example1_branches_are_monotone(eps in 0.0f64..2.0, delta in 0.0f64..2.0, i in 0usize..3, s in 0.001f64..0.999, t in 0.001f64..0.999) {
        prop_assume!(s < t);
        let f = example1(eps, delta).unwrap();
        let b = &f.branches()[i];
        let (x, y) = (b.lo() + s * b.width(), b.lo() + t * b.width());
        let (fx, fy) = (fin(f.eval(x)), fin(f.eval(y)));
        match b.orientation() {
            Orientation::Increasing => prop_assert!(fy > fx),
            Orientation::Decreasing => prop_assert!(fy < fx),
        }
    }
}
