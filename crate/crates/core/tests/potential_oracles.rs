use bern::conformal::{MapOptions, MapPair, Side};
use bern::curves::AnalyticCurve;
use bern::potential::{domain_normal_derivative, green_domain};
use bern::{ExtPoint, C64};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::TAU;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn ellipse_maps() -> MapPair {
    MapPair::solve(&AnalyticCurve::ellipse(1.2, 0.8).unwrap(), 0.0, &MapOptions::default()).unwrap()
}

/// Least-squares fit of `Re Σ c_k b_k(z)` to `data` on the boundary, returning
/// the complex coefficients.
fn harmonic_fit(curve: &AnalyticCurve, basis: &dyn Fn(C64, usize) -> C64, terms: usize, data: &dyn Fn(C64) -> f64) -> Vec<C64> {
    let m = 800;
    let mut a = DMatrix::<f64>::zeros(m, 2 * terms);
    let mut rhs = DVector::<f64>::zeros(m);
    for j in 0..m {
        let z = curve.eval(TAU * j as f64 / m as f64);
        for k in 0..terms {
            let b = basis(z, k);
            a[(j, 2 * k)] = b.re;
            a[(j, 2 * k + 1)] = -b.im;
        }
        rhs[j] = data(z);
    }
    let sol = a.svd(true, true).solve(&rhs, 1e-13).unwrap();
    (0..terms).map(|k| c(sol[2 * k], sol[2 * k + 1])).collect()
}

/// Interior Green's function `−log|z − a| + Re H(z)` from a polynomial
/// Dirichlet fit; returns the inward normal derivative at `(1.2, 0)`.
fn interior_oracle(a: C64) -> f64 {
    let curve = AnalyticCurve::ellipse(1.2, 0.8).unwrap();
    let terms = 60;
    let basis = |z: C64, k: usize| (z / 1.2).powu(k as u32);
    let coef = harmonic_fit(&curve, &basis, terms, &|z| (z - a).norm().ln());
    let z = c(1.2, 0.0);
    let dh: C64 = (1..terms).map(|k| coef[k] * k as f64 * (z / 1.2).powu(k as u32 - 1) / 1.2).sum();
    let dg = -(z - a).inv() + dh;
    (dg * c(-1.0, 0.0)).re
}

/// Exterior Green's function `−log|z − b| + log|z| + Re H(z)` with `H`
/// a series in `1/z`; returns the outward normal derivative at `(1.2, 0)`.
fn exterior_oracle(b: C64) -> f64 {
    let curve = AnalyticCurve::ellipse(1.2, 0.8).unwrap();
    let terms = 60;
    let basis = |z: C64, k: usize| (z / 0.8).inv().powu(k as u32);
    let coef = harmonic_fit(&curve, &basis, terms, &|z| (z - b).norm().ln() - z.norm().ln());
    let z = c(1.2, 0.0);
    let dh: C64 = (1..terms).map(|k| coef[k] * -(k as f64) * (z / 0.8).inv().powu(k as u32 + 1) / 0.8).sum();
    let dg = -(z - b).inv() + z.inv() + dh;
    dg.re
}

#[test]
fn interior_normal_derivative_matches_dirichlet_fit() {
    let maps = ellipse_maps();
    for a in [c(0.0, 0.0), c(0.2, 0.1), c(-0.5, -0.2), c(0.6, 0.3)] {
        let got = domain_normal_derivative(ExtPoint::Finite(a), Side::Interior, &maps).unwrap();
        let want = interior_oracle(a);
        assert!((got - want).abs() < 1e-4 * want, "{a}: {got} vs {want}");
    }
}

#[test]
fn exterior_normal_derivative_matches_dirichlet_fit() {
    let maps = ellipse_maps();
    for b in [c(2.0, 0.5), c(-0.3, 1.5), c(0.0, -3.0)] {
        let got = domain_normal_derivative(ExtPoint::Finite(b), Side::Exterior, &maps).unwrap();
        let want = exterior_oracle(b);
        assert!((got - want).abs() < 1e-4 * want, "{b}: {got} vs {want}");
    }
}

#[test]
fn exterior_infinity_matches_joukowski() {
    // g(z, ∞) = log|(z + √(z² − c²))/(a + b)|, normal derivative 1/b at (a, 0).
    let maps = ellipse_maps();
    let got = domain_normal_derivative(ExtPoint::Infinity, Side::Exterior, &maps).unwrap();
    assert!((got - 1.25).abs() < 1e-10);
    let z = c(0.3, 1.4);
    let g = green_domain(z, ExtPoint::Infinity, Side::Exterior, &maps).unwrap();
    let root = (z * z - 0.8).sqrt();
    let w = if (z + root).norm() > (z - root).norm() { z + root } else { z - root };
    assert!((g - (w.norm() / 2.0).ln()).abs() < 1e-10);
}

#[test]
fn normal_derivative_matches_finite_difference_of_green() {
    let maps = ellipse_maps();
    let u0 = maps.anchor.point;
    for (pole, side, n) in [
        (ExtPoint::Finite(c(0.2, 0.1)), Side::Interior, maps.anchor.n1),
        (ExtPoint::Finite(c(2.0, 0.5)), Side::Exterior, maps.anchor.n2),
        (ExtPoint::Infinity, Side::Exterior, maps.anchor.n2),
    ] {
        let d = |h: f64| green_domain(u0 + n * h, pole, side, &maps).unwrap() / h;
        let h = 1e-4;
        let fd = 2.0 * d(h / 2.0) - d(h);
        let exact = domain_normal_derivative(pole, side, &maps).unwrap();
        assert!((fd - exact).abs() < 1e-6 * exact.max(1.0), "{pole}: {fd} vs {exact}");
    }
}

#[test]
fn green_vanishes_on_the_curve_and_off_side() {
    let maps = ellipse_maps();
    for k in 0..16 {
        let u = maps.curve.eval(TAU * k as f64 / 16.0) * 1.0;
        let g = green_domain(u * 0.999_999, ExtPoint::Finite(c(0.1, 0.0)), Side::Interior, &maps).unwrap();
        assert!(g.abs() < 1e-4);
    }
    assert_eq!(green_domain(c(0.0, 0.0), ExtPoint::Infinity, Side::Exterior, &maps).unwrap(), 0.0);
}
