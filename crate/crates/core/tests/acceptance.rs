//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};
use std::process::Command as Proc;
use std::time::Instant;

use bern::cli::{chebyshev, run, Command, RunOptions};
use bern::conformal::{solve_exterior_map, MapOptions, MapPair, Side};
use bern::curves::{AnalyticCurve, ArcOpenUp};
use bern::potential::{
    arc_bound, bernstein_bound, bernstein_walsh_majorant, disk_normal_derivative, green_disk, near_boundary_growth,
    verify_ratio, Target,
};
use bern::ratfun::{
    principal_parts, random_rational, PoleSet, QuadratureOptions, RationalFunction, SupOptions,
};
use bern::ratfun::{sup_norm, BlaschkeProduct};
use bern::{ExtPoint, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL_EQUALITY: f64 = 1e-9;
const TOL_UNIMODULAR: f64 = 1e-10;
const TOL_DISK_FD: f64 = 1e-6;
const TOL_ARC: f64 = 1e-9;
const TOL_CHEBYSHEV: f64 = 1e-8;
const TOL_MAP: f64 = 1e-8;
const TOL_SPLIT: f64 = 1e-10;
const TOL_MAJORANT: f64 = -1e-8;
const TOL_GROWTH: f64 = 0.10;
const TOL_GOLDEN: f64 = 1e-6;
const TOL_TREND: f64 = 1e-3;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn fail(msg: impl Into<String>) -> Outcome {
    Err(msg.into())
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn tests_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests")
}

fn ellipse() -> AnalyticCurve {
    AnalyticCurve::ellipse(1.2, 0.8).unwrap()
}

fn fixed_poles() -> Vec<(ExtPoint, usize)> {
    vec![
        (ExtPoint::Finite(c(0.2, 0.1)), 3),
        (ExtPoint::Finite(c(-0.5, -0.2)), 2),
        (ExtPoint::Finite(c(2.0, 0.5)), 2),
        (ExtPoint::Finite(c(-0.3, 1.5)), 1),
        (ExtPoint::Infinity, 3),
    ]
}

fn criterion_1() -> Outcome {
    let maps = MapPair::solve(&AnalyticCurve::unit_circle(), 0.0, &MapOptions::default()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_eq, mut worst_norm): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let n = rng.random_range(1..=20);
        let interior = rng.random_bool(0.5);
        let points: Vec<ExtPoint> = (0..n)
            .map(|_| {
                let t = rng.random_range(0.0..TAU);
                if interior {
                    ExtPoint::Finite(C64::from_polar(rng.random_range(0.0..0.9), t))
                } else if rng.random_bool(0.2) {
                    ExtPoint::Infinity
                } else {
                    ExtPoint::Finite(C64::from_polar(rng.random_range(1.15..5.0), t))
                }
            })
            .collect();
        let h = BlaschkeProduct::new(&points).map_err(|e| e.to_string())?;
        let poles = PoleSet::new(points.iter().map(|&p| (p, 1)).collect());
        let bound = bernstein_bound(&poles, &maps).map_err(|e| e.to_string())?.bound;
        let norm = sup_norm(&h, &maps.curve, &SupOptions::default()).map_err(|e| e.to_string())?.value;
        let d = h.derivative(c(1.0, 0.0)).map_err(|e| e.to_string())?.norm();
        worst_eq = worst_eq.max((d - bound * norm).abs());
        worst_norm = worst_norm.max((norm - 1.0).abs());
    }
    check(
        worst_eq < TOL_EQUALITY && worst_norm < TOL_UNIMODULAR,
        format!("max | |h'(1)| - bound*|h| | = {worst_eq:.2e}, max | |h| - 1 | = {worst_norm:.2e}"),
    )
}

/// Richardson extrapolation of `g(1 ± h)/h` along the normal at 1.
fn richardson_normal(pole: ExtPoint, side: Side) -> f64 {
    let sign = if side == Side::Interior { -1.0 } else { 1.0 };
    let levels = 6;
    let mut table: Vec<f64> = (0..levels)
        .map(|k| {
            let h = 1e-2 / 2f64.powi(k);
            green_disk(c(1.0 + sign * h, 0.0), pole, side).unwrap() / h
        })
        .collect();
    for order in 1..levels {
        let f = 2f64.powi(order as i32);
        table = table.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
    }
    table[0]
}

fn criterion_2() -> Outcome {
    let cases = [
        (ExtPoint::Finite(c(0.0, 0.0)), Side::Interior),
        (ExtPoint::Finite(c(0.5, 0.0)), Side::Interior),
        (ExtPoint::Finite(c(-0.5, 0.0)), Side::Interior),
        (ExtPoint::Finite(c(0.3, 0.4)), Side::Interior),
        (ExtPoint::Finite(c(2.0, 0.0)), Side::Exterior),
        (ExtPoint::Finite(c(0.0, 1.25)), Side::Exterior),
        (ExtPoint::Infinity, Side::Exterior),
    ];
    let mut worst: f64 = 0.0;
    for (pole, side) in cases {
        let exact = disk_normal_derivative(pole, side).map_err(|e| e.to_string())?;
        let fd = richardson_normal(pole, side);
        worst = worst.max((fd - exact).abs() / exact);
    }
    check(worst < TOL_DISK_FD, format!("max relative error {worst:.2e} over 7 pullbacks"))
}

fn criterion_3() -> Outcome {
    let arc = ArcOpenUp::segment();
    let mut worst_bound: f64 = 0.0;
    for n in [1usize, 5, 12] {
        for x in [0.0, 0.3, 0.9] {
            let poles = PoleSet::new(vec![(ExtPoint::Infinity, n)]);
            let b = arc_bound(arc.arc_point(x), &poles, &arc).map_err(|e| e.to_string())?.bound;
            let exact = n as f64 / (1.0 - x * x).sqrt();
            worst_bound = worst_bound.max((b - exact).abs());
        }
    }
    let t5 = RationalFunction::polynomial(chebyshev(5)).map_err(|e| e.to_string())?;
    let mut worst_cheb: f64 = 0.0;
    for x in [0.1, 0.3, 0.5, 0.9, (PI / 10.0).cos()] {
        let r = verify_ratio(&t5, &Target::Arc(&arc, x), &SupOptions::default()).map_err(|e| e.to_string())?;
        worst_cheb = worst_cheb.max((r.ratio - (5.0 * x.acos()).sin().abs()).abs());
    }
    let peak = verify_ratio(&t5, &Target::Arc(&arc, (PI / 10.0).cos()), &SupOptions::default())
        .map_err(|e| e.to_string())?
        .ratio;
    check(
        worst_bound < TOL_ARC && worst_cheb < TOL_CHEBYSHEV && (peak - 1.0).abs() < TOL_CHEBYSHEV,
        format!("bound err {worst_bound:.2e}, T5 ratio err {worst_cheb:.2e}, ratio at cos(pi/10) = {peak:.12}"),
    )
}

fn criterion_4() -> Outcome {
    let curve = ellipse();
    let pair = MapPair::solve(&curve, 0.0, &MapOptions::default()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut inner, mut outer): (f64, f64) = (0.0, 0.0);
    let (mut ni, mut no) = (0, 0);
    while ni < 100 || no < 100 {
        let u = c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let q = (u.re / 1.2).powi(2) + (u.im / 0.8).powi(2);
        if q < 0.98 && ni < 100 {
            let v = pair.interior.invert(u).map_err(|e| e.to_string())?;
            inner = inner.max((pair.interior.eval(v).map_err(|e| e.to_string())? - u).norm());
            ni += 1;
        } else if q > 1.03 && no < 100 {
            let v = pair.exterior.invert(u).map_err(|e| e.to_string())?;
            outer = outer.max((pair.exterior.eval(v).map_err(|e| e.to_string())? - u).norm());
            no += 1;
        }
    }
    let forced = MapOptions { force_numerical: true, ..MapOptions::default() };
    let numeric = solve_exterior_map(&curve, pair.anchor, &forced).map_err(|e| e.to_string())?;
    let mut closed: f64 = 0.0;
    for k in 0..64 {
        let v = C64::from_polar(1.0 + 0.05 * (k % 8) as f64, TAU * k as f64 / 64.0);
        let a = numeric.eval(v).map_err(|e| e.to_string())?;
        let b = pair.exterior.eval(v).map_err(|e| e.to_string())?;
        closed = closed.max((a - b).norm());
    }
    let inv_ok = [&pair.interior, &pair.exterior, &numeric]
        .iter()
        .map(|m| m.check_invariants().map(|i| i.passed(TOL_MAP)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?
        .into_iter()
        .all(|b| b);
    check(
        inner < TOL_MAP && outer < TOL_MAP && closed < TOL_MAP && inv_ok,
        format!("roundtrip int {inner:.2e} ext {outer:.2e}, numeric vs closed form {closed:.2e}, invariants {inv_ok}"),
    )
}

fn criterion_5() -> Outcome {
    let curve = ellipse();
    let classified = PoleSet::new(fixed_poles()).classify(&curve).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut recon, mut exact_gap, mut decay): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let samples: Vec<C64> = (0..512).map(|k| curve.eval(TAU * k as f64 / 512.0)).collect();
    for _ in 0..100 {
        let f = random_rational(&mut rng, &fixed_poles());
        let f1 = principal_parts(&f, &classified.inner, Some(&curve), &QuadratureOptions::default())
            .map_err(|e| e.to_string())?;
        let (e1, f2) = f.split_inside_outside(&curve).map_err(|e| e.to_string())?;
        for &u in &samples {
            let fu = f.eval(u).map_err(|e| e.to_string())?;
            let a = f1.eval(u).map_err(|e| e.to_string())?;
            let b = f2.eval(u).map_err(|e| e.to_string())?;
            recon = recon.max((a + b - fu).norm() / fu.norm().max(1.0));
            exact_gap = exact_gap.max((a - e1.eval(u).map_err(|e| e.to_string())?).norm() / fu.norm().max(1.0));
        }
        decay = decay.max(f1.eval(c(1e6, 0.0)).map_err(|e| e.to_string())?.norm() * 1e6);
    }
    check(
        recon < TOL_SPLIT && exact_gap < TOL_SPLIT && decay < 1e2,
        format!("reconstruction {recon:.2e}, quadrature vs exact {exact_gap:.2e}, 1e6*|f1(1e6)| <= {decay:.2e}"),
    )
}

fn criterion_6() -> Outcome {
    let curve = ellipse();
    let maps = MapPair::solve(&curve, 0.0, &MapOptions::default()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut slack = f64::INFINITY;
    let mut probes = 0;
    while probes < 100 {
        let u = c(rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5));
        let (dist, _) = curve.distance_to(u);
        let near_pole = fixed_poles().iter().any(|(p, _)| p.finite().is_some_and(|a| (a - u).norm() < 0.05));
        if dist < 0.02 || near_pole {
            continue;
        }
        let f = random_rational(&mut rng, &fixed_poles());
        let sup = sup_norm(&f, &curve, &SupOptions::default()).map_err(|e| e.to_string())?.value;
        let major = bernstein_walsh_majorant(&f, u, sup, &maps).map_err(|e| e.to_string())?;
        let value = f.eval(u).map_err(|e| e.to_string())?.norm();
        slack = slack.min((major - value) / major);
        probes += 1;
    }
    let outer: Vec<ExtPoint> = fixed_poles().into_iter().map(|p| p.0).filter(|p| !p.finite().is_some_and(|a| curve.encloses(a))).collect();
    let coarse = near_boundary_growth(&maps, &outer, 512).map_err(|e| e.to_string())?;
    let fine = near_boundary_growth(&maps, &outer, 2048).map_err(|e| e.to_string())?;
    let drift = (fine / coarse - 1.0).abs();
    check(
        slack >= TOL_MAJORANT && drift <= TOL_GROWTH,
        format!("min relative slack {slack:.3e}, growth 512 -> 2048: {coarse:.6} -> {fine:.6} (drift {drift:.2e})"),
    )
}

fn run_spec(name: &str) -> Result<(String, String), String> {
    let path = tests_dir().join("specs").join(format!("{name}.json"));
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let spec: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let cmd = match spec["command"].as_str() {
        Some("bound") => Command::Bound,
        Some("verify") => Command::Verify,
        Some("sharpness") => Command::Sharpness,
        Some("map") => Command::Map,
        Some("greens") => Command::Greens,
        other => return Err(format!("{name}: unknown command {other:?}")),
    };
    let b = run(cmd, &text, &RunOptions::default()).map_err(|e| format!("{name}: {e}"))?;
    Ok((b.summary, b.items))
}

fn golden(name: &str, file: &str) -> String {
    std::fs::read_to_string(tests_dir().join("golden").join(name).join(file)).unwrap_or_default()
}

/// Largest cell-wise deviation, `max(1, |golden|)`-scaled; `None` on shape or text mismatch.
fn csv_deviation(actual: &str, expected: &str) -> Option<f64> {
    let a: Vec<&str> = actual.lines().collect();
    let e: Vec<&str> = expected.lines().collect();
    if a.len() != e.len() {
        return None;
    }
    let mut worst: f64 = 0.0;
    for (la, le) in a.iter().zip(&e) {
        let ca: Vec<&str> = la.split(',').collect();
        let ce: Vec<&str> = le.split(',').collect();
        if ca.len() != ce.len() {
            return None;
        }
        for (x, y) in ca.iter().zip(&ce) {
            match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(x), Ok(y)) => worst = worst.max((x - y).abs() / y.abs().max(1.0)),
                _ if x == y => {}
                _ => return None,
            }
        }
    }
    Some(worst)
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap_or("").split(',').position(|h| h == name).unwrap_or(usize::MAX);
    lines.filter_map(|l| l.split(',').nth(idx).and_then(|v| v.parse().ok())).collect()
}

fn criterion_7() -> Outcome {
    let (_, circle) = run_spec("sharpness_circle")?;
    let circle_r = column(&circle, "r_n");
    let circle_dev = circle_r.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    let (_, ell) = run_spec("sharpness_ellipse")?;
    let r = column(&ell, "r_n");
    let frozen = column(&golden("sharpness_ellipse", "items.csv"), "r_n");
    if r.len() != 4 || frozen.len() != 4 || circle_r.len() != 3 {
        return fail(format!("unexpected row counts: ellipse {} golden {} circle {}", r.len(), frozen.len(), circle_r.len()));
    }
    let dev = r.iter().zip(&frozen).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let trend = r.windows(2).all(|w| w[1] >= w[0] - TOL_TREND);
    let flags_ok = ell.lines().skip(1).chain(circle.lines().skip(1)).all(|l| l.ends_with(",ok"));
    check(
        circle_dev < TOL_GOLDEN && dev < TOL_GOLDEN && r[3] >= 0.9 && trend && flags_ok,
        format!("circle max |r_n - 1| {circle_dev:.2e}; ellipse r_n {r:.9?}, golden dev {dev:.2e}, trend {trend}, flags ok {flags_ok}"),
    )
}

fn criterion_8() -> Outcome {
    let (summary, items) = run_spec("corpus_ellipse")?;
    let ratios = column(&items, "ratio");
    let frozen = column(&golden("corpus_ellipse", "items.csv"), "ratio");
    if ratios.len() != 200 || frozen.len() != 200 {
        return fail(format!("expected 200 rows, got {} (golden {})", ratios.len(), frozen.len()));
    }
    let dev = ratios.iter().zip(&frozen).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let max_ratio = column(&summary, "max_ratio")[0];
    let max_rough = column(&summary, "max_rough_ratio")[0];
    let g = golden("corpus_ellipse", "summary.csv");
    let gdev = (max_ratio - column(&g, "max_ratio")[0]).abs().max((max_rough - column(&g, "max_rough_ratio")[0]).abs());
    check(
        dev < TOL_GOLDEN && gdev < TOL_GOLDEN,
        format!("ratio golden dev {dev:.2e}; max ratio {max_ratio:.9}, max rough ratio {max_rough:.9} (dev {gdev:.2e})"),
    )
}

fn criterion_9() -> Outcome {
    let mut names: Vec<String> = std::fs::read_dir(tests_dir().join("specs"))
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok()?.path().file_stem()?.to_str().map(String::from))
        .collect();
    names.sort();
    let mut worst: f64 = 0.0;
    for name in &names {
        let first = run_spec(name)?;
        let second = run_spec(name)?;
        if first != second {
            return fail(format!("{name}: rerun not byte-identical"));
        }
        for (actual, file) in [(&first.0, "summary.csv"), (&first.1, "items.csv")] {
            match csv_deviation(actual, &golden(name, file)) {
                Some(d) => worst = worst.max(d),
                None => return fail(format!("{name}/{file}: layout differs from golden")),
            }
        }
    }
    if worst >= TOL_GOLDEN {
        return fail(format!("golden deviation {worst:.2e}"));
    }
    let bin = env!("CARGO_BIN_EXE_bern");
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut codes = Vec::new();
    for (file, path) in
        [("missing_curve", "`curve`"), ("bad_radius", "`curve`"), ("negative_tolerance", "`tolerances.tol_map`")]
    {
        let o = Proc::new(bin)
            .args(["bound", "--config"])
            .arg(tests_dir().join("malformed").join(format!("{file}.json")))
            .arg("--out")
            .arg(out.path())
            .output()
            .map_err(|e| e.to_string())?;
        let stderr = String::from_utf8_lossy(&o.stderr);
        if o.status.code() != Some(2) || !stderr.contains(path) {
            return fail(format!("{file}: exit {:?}, stderr {stderr:?}", o.status.code()));
        }
        codes.push(2);
    }
    check(true, format!("{} specs rerun byte-identical (golden dev {worst:.1e}); malformed exits {codes:?}", names.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, f64); 9] = [
        ("circle equality for one-sided Blaschke products", criterion_1, 1.0),
        ("disk normal derivatives vs Richardson differences", criterion_2, 1.0),
        ("classical Bernstein and Chebyshev on [-1, 1]", criterion_3, 2.0),
        ("ellipse conformal maps", criterion_4, 10.0),
        ("inside/outside decomposition", criterion_5, 5.0),
        ("Bernstein-Walsh majorant and near-boundary growth", criterion_6, 10.0),
        ("sharpness sweep goldens", criterion_7, 60.0),
        ("ellipse corpus regression", criterion_8, 60.0),
        ("CLI determinism and exit codes", criterion_9, f64::INFINITY),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = match outcome {
            Ok(d) if secs < *limit => (true, d),
            Ok(d) => (false, format!("{d}; runtime over limit")),
            Err(d) => (false, d),
        };
        let limit = if limit.is_finite() { format!(", limit {limit:.0} s") } else { String::new() };
        println!("criterion {} {}: {} [{secs:.2} s{limit}] {detail}", i + 1, if ok { "PASS" } else { "FAIL" }, name);
        if !ok {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
