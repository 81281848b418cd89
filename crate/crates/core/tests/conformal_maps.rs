use bern::conformal::{solve_exterior_map, MapOptions, MapPair};
use bern::curves::AnalyticCurve;
use bern::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ellipse_pair() -> MapPair {
    let curve = AnalyticCurve::ellipse(1.2, 0.8).unwrap();
    MapPair::solve(&curve, 0.0, &MapOptions::default()).unwrap()
}

#[test]
fn ellipse_interior_roundtrip() {
    let pair = ellipse_pair();
    assert!(!pair.interior.closed_form);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 100 {
        let u = C64::new(rng.random_range(-1.2..1.2), rng.random_range(-0.8..0.8));
        if (u.re / 1.2).powi(2) + (u.im / 0.8).powi(2) >= 0.98 {
            continue;
        }
        let v = pair.interior.invert(u).unwrap();
        assert!(v.norm() < 1.0);
        worst = worst.max((pair.interior.eval(v).unwrap() - u).norm());
        n += 1;
    }
    assert!(worst < 1e-8, "{worst:e}");
}

#[test]
fn ellipse_exterior_roundtrip() {
    let pair = ellipse_pair();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 100 {
        let u = C64::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        if (u.re / 1.2).powi(2) + (u.im / 0.8).powi(2) <= 1.02 {
            continue;
        }
        let v = pair.exterior.invert(u).unwrap();
        assert!(v.norm() > 1.0);
        worst = worst.max((pair.exterior.eval(v).unwrap() - u).norm());
        n += 1;
    }
    assert!(worst < 1e-8, "{worst:e}");
}

#[test]
fn numerical_exterior_matches_closed_form() {
    let curve = AnalyticCurve::ellipse(1.2, 0.8).unwrap();
    let anchor = curve.boundary_point(0.0).unwrap();
    let exact = solve_exterior_map(&curve, anchor, &MapOptions::default()).unwrap();
    assert!(exact.closed_form);
    let opts = MapOptions { force_numerical: true, ..MapOptions::default() };
    let numeric = solve_exterior_map(&curve, anchor, &opts).unwrap();
    assert!(!numeric.closed_form);
    let mut worst: f64 = 0.0;
    for j in 0..64 {
        for r in [1.0, 1.5, 3.0] {
            let v = C64::from_polar(r, std::f64::consts::TAU * j as f64 / 64.0);
            worst = worst.max((exact.eval(v).unwrap() - numeric.eval(v).unwrap()).norm());
        }
    }
    assert!(worst < 1e-8, "{worst:e}");
}

#[test]
fn anchor_invariants_and_boundary_match() {
    let pair = ellipse_pair();
    for map in [&pair.interior, &pair.exterior] {
        let inv = map.check_invariants().unwrap();
        assert!(inv.passed(1e-8), "{inv:?}");
    }
    assert!(pair.boundary_match(512).unwrap() < 1e-6);
    let a1 = pair.interior.derivative_at_anchor;
    let a2 = pair.exterior.derivative_at_anchor;
    assert!((a1 / a2).arg().abs() < 1e-6, "{a1} {a2}");
    assert!(pair.delta1 > 0.0);
}

#[test]
fn generic_trig_curve_maps() {
    let curve = AnalyticCurve::trig(&[
        (1, C64::new(1.0, 0.0)),
        (2, C64::new(0.08, 0.03)),
        (-1, C64::new(0.15, 0.0)),
    ])
    .unwrap();
    let pair = MapPair::solve(&curve, 0.7, &MapOptions::default()).unwrap();
    assert!(pair.interior.check_invariants().unwrap().passed(1e-8));
    assert!(pair.exterior.check_invariants().unwrap().passed(1e-8));
    assert!(pair.boundary_match(512).unwrap() < 1e-6);
    let u = C64::new(0.2, -0.1);
    let v = pair.interior.invert(u).unwrap();
    assert!((pair.interior.eval(v).unwrap() - u).norm() < 1e-10);
    let u = C64::new(2.0, 1.0);
    let v = pair.exterior.invert(u).unwrap();
    assert!((pair.exterior.eval(v).unwrap() - u).norm() < 1e-10);
}
