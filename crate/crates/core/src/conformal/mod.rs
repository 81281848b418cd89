//! Normalized Riemann maps `Φ₁: 𝔻 → G₁` and `Φ₂: 𝔻* → G₂` anchored at a
//! boundary point `u₀`, so that `Φⱼ(1) = u₀` and `|Φⱼ'(1)| = 1`.
//!
//! A map is stored as a *raw* Riemann map (Taylor series at 0 for the
//! interior, Laurent series at ∞ for the exterior) together with the
//! normalizing precomposition `v ↦ ζ₀·φ_s(v)`, where `ζ₀` is the raw
//! preimage of `u₀` and `φ_s(v) = (v + s)/(1 + s v)` is the hyperbolic
//! automorphism fixing ±1. Evaluation composes the two exactly.

mod theodorsen;

use std::f64::consts::TAU;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::curves::{polygon_self_intersections, polygon_winding, AnalyticCurve, BoundaryPoint, Shape};
use crate::error::{fmt_c, Error, Result};
use crate::mobius::ExtPoint;
use crate::C64;

use theodorsen::{solve_interior, Inverted, TheodorsenOptions};

/// Which complementary component of the curve a map covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Interior,
    Exterior,
}

/// Largest extension margin reported for maps that continue everywhere.
pub const MAX_MARGIN: f64 = 0.5;

#[derive(Debug, Clone, Copy)]
pub struct MapOptions {
    /// Tolerance for the anchor invariants.
    pub tol_map: f64,
    /// Solve numerically even when a closed form exists.
    pub force_numerical: bool,
    pub min_grid: usize,
    pub max_grid: usize,
    /// Under-relaxation factor of the Theodorsen iteration.
    pub relaxation: f64,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self { tol_map: 1e-10, force_numerical: false, min_grid: 256, max_grid: 16384, relaxation: 0.9 }
    }
}

/// A normalized Riemann map of one side of the curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConformalMap {
    pub side: Side,
    /// Raw series. Interior: `Σ a_k ζ^k`. Exterior: `series[0]·ζ + Σ_{k≥1} series[k]·ζ^{1−k}`.
    pub series: Vec<C64>,
    /// Raw boundary correspondence `(φ_j, t_j)`: `raw(e^{iφ_j}) = γ(t_j)`.
    pub correspondence: Vec<(f64, f64)>,
    pub anchor: BoundaryPoint,
    /// Unimodular raw preimage `ζ₀` of the anchor.
    pub rotation: C64,
    /// Parameter of the hyperbolic automorphism `φ_s`.
    pub s: f64,
    /// `Φ'(1)` of the normalized map.
    pub derivative_at_anchor: C64,
    /// Radius in raw coordinates up to which the series is verified univalent
    /// (`> 1` interior, `< 1` exterior).
    pub raw_radius: f64,
    /// Normalized margin: verified on `|v| ≤ 1 + δ` (interior) or `|v| ≥ 1 − δ` (exterior).
    pub margin: f64,
    /// Largest unresolved series coefficient relative to the leading one.
    pub tail: f64,
    pub closed_form: bool,
    pub iterations: usize,
    /// Final fixed-point residual of the iteration (0 for closed forms).
    pub residual: f64,
    #[serde(skip)]
    guesses: OnceLock<Vec<(C64, C64)>>,
}

fn phi_s(s: f64, v: C64) -> C64 {
    (v + s) / (1.0 + s * v)
}

fn phi_s_derivative(s: f64, v: C64) -> C64 {
    let d = 1.0 + s * v;
    C64::new(1.0 - s * s, 0.0) / (d * d)
}

fn phi_s_ext(s: f64, v: ExtPoint) -> ExtPoint {
    match v {
        ExtPoint::Infinity => {
            if s == 0.0 {
                ExtPoint::Infinity
            } else {
                ExtPoint::Finite(C64::new(1.0 / s, 0.0))
            }
        }
        ExtPoint::Finite(v) => {
            let den = 1.0 + s * v;
            if den.norm() == 0.0 {
                ExtPoint::Infinity
            } else {
                ExtPoint::Finite((v + s) / den)
            }
        }
    }
}

impl ConformalMap {
    fn raw_eval(&self, z: C64) -> C64 {
        match self.side {
            Side::Interior => self.series.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c),
            Side::Exterior => {
                let w = z.inv();
                let tail = self.series[1..].iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * w + c);
                self.series[0] * z + tail
            }
        }
    }

    fn raw_derivative(&self, z: C64) -> C64 {
        match self.side {
            Side::Interior => {
                let n = self.series.len();
                let mut acc = C64::new(0.0, 0.0);
                for k in (1..n).rev() {
                    acc = acc * z + self.series[k] * k as f64;
                }
                acc
            }
            Side::Exterior => {
                // d/dζ Σ_{k≥1} c_k ζ^{1−k} = Σ_{k≥2} (1−k) c_k ζ^{−k}
                let w = z.inv();
                let n = self.series.len();
                let mut acc = C64::new(0.0, 0.0);
                for k in (2..n).rev() {
                    acc = acc * w + self.series[k] * (1.0 - k as f64);
                }
                self.series[0] + acc * w * w
            }
        }
    }

    fn raw_in_domain(&self, z: C64) -> bool {
        let r = z.norm();
        match self.side {
            Side::Interior => r <= self.raw_radius * (1.0 + 1e-12),
            Side::Exterior => r >= self.raw_radius * (1.0 - 1e-12),
        }
    }

    /// Normalized map `Φ(v) = raw(ζ₀ φ_s(v))`.
    pub fn eval(&self, v: C64) -> Result<C64> {
        match self.eval_ext(ExtPoint::Finite(v))? {
            ExtPoint::Finite(u) => Ok(u),
            ExtPoint::Infinity => Err(Error::OutsideDomain { arg: fmt_c(v) }),
        }
    }

    pub fn eval_ext(&self, v: ExtPoint) -> Result<ExtPoint> {
        match phi_s_ext(self.s, v) {
            ExtPoint::Infinity => match self.side {
                Side::Exterior => Ok(ExtPoint::Infinity),
                Side::Interior => Err(Error::OutsideDomain { arg: v.to_string() }),
            },
            ExtPoint::Finite(w) => {
                let z = self.rotation * w;
                if !self.raw_in_domain(z) {
                    return Err(Error::OutsideDomain { arg: v.to_string() });
                }
                Ok(ExtPoint::Finite(self.raw_eval(z)))
            }
        }
    }

    pub fn derivative(&self, v: C64) -> Result<C64> {
        let w = phi_s(self.s, v);
        let z = self.rotation * w;
        if !z.is_finite() || !self.raw_in_domain(z) {
            return Err(Error::OutsideDomain { arg: fmt_c(v) });
        }
        Ok(self.raw_derivative(z) * self.rotation * phi_s_derivative(self.s, v))
    }

    /// `Φ⁻¹(u)`, by damped Newton iteration on the raw series.
    pub fn invert(&self, u: C64) -> Result<C64> {
        match self.invert_ext(ExtPoint::Finite(u))? {
            ExtPoint::Finite(v) => Ok(v),
            ExtPoint::Infinity => Err(Error::OutsideDomain { arg: fmt_c(u) }),
        }
    }

    pub fn invert_ext(&self, u: ExtPoint) -> Result<ExtPoint> {
        let z = match u {
            ExtPoint::Infinity => match self.side {
                Side::Exterior => ExtPoint::Infinity,
                Side::Interior => return Err(Error::OutsideDomain { arg: u.to_string() }),
            },
            ExtPoint::Finite(u) => ExtPoint::Finite(self.raw_invert(u)?),
        };
        let w = match z {
            ExtPoint::Finite(z) => ExtPoint::Finite(z * self.rotation.conj()),
            ExtPoint::Infinity => ExtPoint::Infinity,
        };
        Ok(phi_s_ext(-self.s, w))
    }

    fn initial_guesses(&self) -> &[(C64, C64)] {
        self.guesses.get_or_init(|| {
            let radii: Vec<f64> = match self.side {
                Side::Interior => {
                    let mut r = vec![0.0, 0.25, 0.5, 0.7, 0.82, 0.9, 0.95, 0.98, 1.0];
                    if self.raw_radius > 1.0 {
                        r.push(1.0 + 0.5 * (self.raw_radius - 1.0));
                        r.push(self.raw_radius);
                    }
                    r
                }
                Side::Exterior => {
                    let mut r = vec![1.0, 1.02, 1.05, 1.1, 1.2, 1.35, 1.6, 2.0, 3.0, 5.0, 10.0];
                    if self.raw_radius < 1.0 {
                        r.push(self.raw_radius);
                        r.push(1.0 - 0.5 * (1.0 - self.raw_radius));
                    }
                    r
                }
            };
            let m = 256;
            let mut out = Vec::with_capacity(radii.len() * m);
            for &r in &radii {
                for j in 0..m {
                    let z = C64::from_polar(r, TAU * j as f64 / m as f64);
                    out.push((self.raw_eval(z), z));
                    if r == 0.0 {
                        break;
                    }
                }
            }
            out
        })
    }

    fn raw_invert(&self, u: C64) -> Result<C64> {
        let scale = 1.0 + u.norm();
        let mut z = self
            .initial_guesses()
            .iter()
            .min_by(|a, b| (a.0 - u).norm().total_cmp(&(b.0 - u).norm()))
            .map(|p| p.1)
            .expect("guess table is non-empty");
        if self.side == Side::Exterior {
            let lead = self.series[0];
            let asym = (u - self.series.get(1).copied().unwrap_or_default()) / lead;
            if asym.norm() > 10.0 && (self.raw_eval(asym) - u).norm() < (self.raw_eval(z) - u).norm() {
                z = asym;
            }
        }
        let mut res = self.raw_eval(z) - u;
        for _ in 0..200 {
            if res.norm() <= 1e-14 * scale {
                break;
            }
            let step = res / self.raw_derivative(z);
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let cand = z - step * lambda;
                if cand.is_finite() && self.raw_in_domain(cand) {
                    let r = self.raw_eval(cand) - u;
                    if r.norm() < res.norm() {
                        z = cand;
                        res = r;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted || (step * lambda).norm() < 1e-16 * z.norm().max(1.0) {
                break;
            }
        }
        if res.norm() > 1e-11 * scale {
            return Err(Error::NotConverged { what: format!("map inversion at {}", fmt_c(u)), residual: res.norm() });
        }
        Ok(z)
    }

    /// `|Φ(1) − u₀|`, `||Φ'(1)| − 1|` and monotonicity of the correspondence.
    pub fn check_invariants(&self) -> Result<MapInvariants> {
        let one = C64::new(1.0, 0.0);
        let anchor_residual = (self.eval(one)? - self.anchor.point).norm();
        let derivative_error = (self.derivative(one)?.norm() - 1.0).abs();
        let mut increasing = true;
        let n = self.correspondence.len();
        for j in 0..n {
            let t0 = self.correspondence[j].1;
            let t1 = self.correspondence[(j + 1) % n].1 + if j + 1 == n { TAU } else { 0.0 };
            let gap = (t1 - t0).rem_euclid(TAU);
            increasing &= gap > 0.0 && gap < std::f64::consts::PI;
        }
        Ok(MapInvariants { anchor_residual, derivative_error, correspondence_increasing: increasing, tail: self.tail })
    }

    /// Largest distance from `Φ(e^{iθ})` to the curve over `m` offset samples.
    pub fn boundary_match(&self, curve: &AnalyticCurve, m: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for j in 0..m {
            let v = C64::from_polar(1.0, TAU * (j as f64 + 0.5) / m as f64);
            let u = self.eval(v)?;
            worst = worst.max(curve.distance_to(u).0);
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MapInvariants {
    pub anchor_residual: f64,
    pub derivative_error: f64,
    pub correspondence_increasing: bool,
    pub tail: f64,
}

impl MapInvariants {
    pub fn passed(&self, tol: f64) -> bool {
        self.anchor_residual <= tol && self.derivative_error <= tol && self.correspondence_increasing
    }
}

/// A raw Riemann map before anchoring.
#[derive(Debug, Clone)]
pub struct RawMap {
    pub side: Side,
    pub series: Vec<C64>,
    pub correspondence: Vec<(f64, f64)>,
    pub tail: f64,
    pub closed_form: bool,
    pub iterations: usize,
    pub residual: f64,
}

fn uniform_correspondence(m: usize) -> Vec<(f64, f64)> {
    (0..m).map(|j| (TAU * j as f64 / m as f64, TAU * j as f64 / m as f64)).collect()
}

/// Series coefficients are dropped below this fraction of the largest one.
const SERIES_FLOOR: f64 = 1e-17;

fn interior_raw(curve: &AnalyticCurve, opts: &MapOptions) -> Result<RawMap> {
    if !opts.force_numerical {
        if let Shape::Circle { center, radius } = curve.shape() {
            return Ok(RawMap {
                side: Side::Interior,
                series: vec![center, C64::new(radius, 0.0)],
                correspondence: uniform_correspondence(256),
                tail: 0.0,
                closed_form: true,
                iterations: 0,
                residual: 0.0,
            });
        }
    }
    let center = curve.centroid(2048);
    let topts = TheodorsenOptions {
        min_grid: opts.min_grid,
        max_grid: opts.max_grid,
        relaxation: opts.relaxation,
        ..TheodorsenOptions::default()
    };
    let sol = solve_interior(curve, center, &topts)?;
    let m = sol.params.len();
    let mut series: Vec<C64> = sol.spectrum[..=m / 2].to_vec();
    trim_series(&mut series);
    let correspondence = sol
        .params
        .iter()
        .enumerate()
        .map(|(j, &t)| (TAU * j as f64 / m as f64, t.rem_euclid(TAU)))
        .collect();
    Ok(RawMap {
        side: Side::Interior,
        series,
        correspondence,
        tail: sol.tail,
        closed_form: false,
        iterations: sol.iterations,
        residual: sol.residual,
    })
}

fn trim_series(series: &mut Vec<C64>) {
    let big = series.iter().map(|c| c.norm()).fold(0.0, f64::max);
    while series.len() > 2 && series.last().map(|c| c.norm() <= SERIES_FLOOR * big).unwrap_or(false) {
        series.pop();
    }
    // Isolated noise below the floor inside the kept range is harmless; the
    // cut-off only removes the resolved-zero tail.
    let noise = 1e-15 * big;
    if let Some(last) = series.iter().rposition(|c| c.norm() > noise) {
        series.truncate((last + 1).max(2));
    }
}

fn exterior_raw(curve: &AnalyticCurve, opts: &MapOptions) -> Result<RawMap> {
    if !opts.force_numerical {
        match curve.shape() {
            Shape::Circle { center, radius } => {
                return Ok(RawMap {
                    side: Side::Exterior,
                    series: vec![C64::new(radius, 0.0), center],
                    correspondence: uniform_correspondence(256),
                    tail: 0.0,
                    closed_form: true,
                    iterations: 0,
                    residual: 0.0,
                })
            }
            Shape::Ellipse { a, b } => {
                return Ok(RawMap {
                    side: Side::Exterior,
                    series: vec![C64::new((a + b) / 2.0, 0.0), C64::new(0.0, 0.0), C64::new((a - b) / 2.0, 0.0)],
                    correspondence: uniform_correspondence(256),
                    tail: 0.0,
                    closed_form: true,
                    iterations: 0,
                    residual: 0.0,
                })
            }
            Shape::Trig => {}
        }
    }
    let center = curve.centroid(2048);
    let inverted = Inverted { curve, center };
    let topts = TheodorsenOptions {
        min_grid: opts.min_grid,
        max_grid: opts.max_grid,
        relaxation: opts.relaxation,
        ..TheodorsenOptions::default()
    };
    let sol = solve_interior(&inverted, C64::new(0.0, 0.0), &topts)?;
    let m = sol.params.len();
    // raw(e^{iφ}) = center + 1/Ψ(e^{−iφ}) = γ(−t'(−φ)).
    let params: Vec<f64> = (0..m).map(|j| (-sol.params[(m - j) % m]).rem_euclid(TAU)).collect();
    let values: Vec<C64> = params.iter().map(|&t| curve.eval(t)).collect();
    let spectrum = dft(&values);
    let mut series = Vec::with_capacity(m / 2 + 1);
    series.push(spectrum[1]);
    series.push(spectrum[0]);
    for k in 1..m / 2 {
        series.push(spectrum[m - k]);
    }
    trim_series(&mut series);
    let lead = spectrum[1].norm();
    let positive_tail = spectrum[2..m / 2].iter().map(|c| c.norm()).fold(0.0, f64::max) / lead;
    let correspondence = params.iter().enumerate().map(|(j, &t)| (TAU * j as f64 / m as f64, t)).collect();
    Ok(RawMap {
        side: Side::Exterior,
        series,
        correspondence,
        tail: sol.tail.max(positive_tail),
        closed_form: false,
        iterations: sol.iterations,
        residual: sol.residual,
    })
}

fn dft(values: &[C64]) -> Vec<C64> {
    let m = values.len();
    let mut buf = values.to_vec();
    rustfft::FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    buf.iter().map(|x| x / m as f64).collect()
}

/// Verified raw radius: the continued series is probed on circles with
/// growing excess until the image stops being a simple positively oriented
/// curve (or the series stops converging); half the last passing excess is kept.
fn measure_raw_radius(raw: &RawMap) -> f64 {
    let probe = ConformalMap {
        side: raw.side,
        series: raw.series.clone(),
        correspondence: Vec::new(),
        anchor: BoundaryPoint { t: 0.0, point: C64::default(), n1: C64::default(), n2: C64::default() },
        rotation: C64::new(1.0, 0.0),
        s: 0.0,
        derivative_at_anchor: C64::new(1.0, 0.0),
        raw_radius: match raw.side {
            Side::Interior => f64::INFINITY,
            Side::Exterior => 0.0,
        },
        margin: 0.0,
        tail: raw.tail,
        closed_form: raw.closed_form,
        iterations: 0,
        residual: 0.0,
        guesses: OnceLock::new(),
    };
    let lead = raw.series.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let cap = match raw.side {
        Side::Interior => 2.0 * MAX_MARGIN + 0.5,
        Side::Exterior => 2.0 * MAX_MARGIN,
    };
    let mut passing = 0.0;
    let mut excess = 0.005;
    while excess <= cap + 1e-12 {
        let r = match raw.side {
            Side::Interior => 1.0 + excess,
            Side::Exterior => 1.0 - excess,
        };
        if !(r > 0.0) || !probe_circle(&probe, raw, r, lead) {
            break;
        }
        passing = excess;
        excess *= 1.25;
    }
    let kept = (passing / 2.0).min(MAX_MARGIN);
    match raw.side {
        Side::Interior => 1.0 + kept,
        Side::Exterior => 1.0 - kept,
    }
}

fn probe_circle(probe: &ConformalMap, raw: &RawMap, r: f64, lead: f64) -> bool {
    let n = raw.series.len();
    // Tail terms of the continued series must still be negligible.
    let last = n.saturating_sub(6).max(1);
    let tail_size = raw.series[last..]
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = (last + i) as f64;
            match raw.side {
                Side::Interior => c.norm() * r.powf(k),
                Side::Exterior => c.norm() * r.powf(1.0 - k),
            }
        })
        .fold(0.0, f64::max);
    if raw.closed_form {
        // Finite series: no truncation error.
    } else if !(tail_size < 1e-11 * lead) {
        return false;
    }
    let m = 1024;
    let pts: Vec<C64> = (0..m).map(|j| probe.raw_eval(C64::from_polar(r, TAU * j as f64 / m as f64))).collect();
    if pts.iter().any(|p| !p.is_finite()) {
        return false;
    }
    let min_deriv = (0..m)
        .map(|j| probe.raw_derivative(C64::from_polar(r, TAU * j as f64 / m as f64)).norm())
        .fold(f64::INFINITY, f64::min);
    if !(min_deriv > 1e-8 * lead) {
        return false;
    }
    if polygon_self_intersections(&pts) != 0 {
        return false;
    }
    let reference = match raw.side {
        Side::Interior => probe.raw_eval(C64::new(0.0, 0.0)),
        Side::Exterior => crate::curves::polygon_centroid(&pts),
    };
    (polygon_winding(&pts, reference) - 1.0).abs() < 1e-6
}

/// Normalized margin from the raw verified radius (see module docs).
fn normalized_margin(side: Side, s: f64, raw_radius: f64) -> f64 {
    let reach = |r: f64| -> (f64, f64) {
        let a = phi_s(s, C64::new(r, 0.0)).norm();
        let b = phi_s(s, C64::new(-r, 0.0)).norm();
        (a.min(b), a.max(b))
    };
    match side {
        Side::Interior => {
            let upper = if s == 0.0 { 1.0 + MAX_MARGIN } else { (1.0 / s.abs()).min(1.0 + MAX_MARGIN) };
            let (mut lo, mut hi) = (1.0, upper);
            if reach(hi).1 <= raw_radius && s.abs() * hi < 1.0 - 1e-9 {
                return hi - 1.0;
            }
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if reach(mid).1 <= raw_radius {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (lo - 1.0).min(MAX_MARGIN)
        }
        Side::Exterior => {
            let lower = 1.0 - MAX_MARGIN;
            let (mut lo, mut hi) = (lower, 1.0);
            if reach(lo).0 >= raw_radius {
                return 1.0 - lo;
            }
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if reach(mid).0 >= raw_radius {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            1.0 - hi
        }
    }
}

/// Anchors a raw map at `u₀`: rotation sending 1 to the raw preimage of
/// `u₀`, then `φ_s` with `(1 − s)/(1 + s) = 1/|raw'(ζ₀)|`.
pub fn normalize_at_anchor(raw: RawMap, curve: &AnalyticCurve, anchor: BoundaryPoint, tol: f64) -> Result<ConformalMap> {
    let raw_radius = measure_raw_radius(&raw);
    let mut map = ConformalMap {
        side: raw.side,
        series: raw.series,
        correspondence: raw.correspondence,
        anchor,
        rotation: C64::new(1.0, 0.0),
        s: 0.0,
        derivative_at_anchor: C64::new(1.0, 0.0),
        raw_radius,
        margin: 0.0,
        tail: raw.tail,
        closed_form: raw.closed_form,
        iterations: raw.iterations,
        residual: raw.residual,
        guesses: OnceLock::new(),
    };
    let zeta = locate_anchor(&map, curve, anchor, tol)?;
    let k = 1.0 / map.raw_derivative(zeta).norm();
    let s = (1.0 - k) / (1.0 + k);
    map.rotation = zeta;
    map.s = s;
    map.derivative_at_anchor = map.raw_derivative(zeta) * zeta * ((1.0 - s) / (1.0 + s));
    map.margin = normalized_margin(map.side, s, raw_radius);
    Ok(map)
}

fn locate_anchor(map: &ConformalMap, curve: &AnalyticCurve, anchor: BoundaryPoint, tol: f64) -> Result<C64> {
    let target = anchor.t.rem_euclid(TAU);
    let n = map.correspondence.len();
    if n == 0 {
        return Err(Error::AnchorNotFound("empty correspondence table".into()));
    }
    // Find the correspondence cell containing the anchor parameter.
    let mut phi = None;
    for j in 0..n {
        let (p0, t0) = map.correspondence[j];
        let (p1, t1) = map.correspondence[(j + 1) % n];
        let p1 = if j + 1 == n { p1 + TAU } else { p1 };
        let span = (t1 - t0).rem_euclid(TAU);
        let off = (target - t0).rem_euclid(TAU);
        if span > 0.0 && off <= span {
            phi = Some(p0 + (p1 - p0) * off / span);
            break;
        }
    }
    let phi = phi.ok_or_else(|| Error::AnchorNotFound(format!("t = {} not covered by the table", anchor.t)))?;
    let u0 = curve.eval(anchor.t);
    let mut z = C64::from_polar(1.0, phi);
    for _ in 0..100 {
        let r = map.raw_eval(z) - u0;
        if r.norm() < 1e-15 * (1.0 + u0.norm()) {
            break;
        }
        let step = r / map.raw_derivative(z);
        z -= step;
        if step.norm() < 1e-16 {
            break;
        }
    }
    let zeta = z / z.norm();
    let residual = (map.raw_eval(zeta) - u0).norm();
    if !residual.is_finite() || residual > tol.max(1e-12) * (1.0 + u0.norm()) || (z.norm() - 1.0).abs() > 1e-6 {
        return Err(Error::AnchorNotFound(format!("residual {residual:.3e} at t = {}", anchor.t)));
    }
    Ok(zeta)
}

/// Interior map `Φ₁: 𝔻 → G₁` normalized at `u₀`.
pub fn solve_interior_map(curve: &AnalyticCurve, anchor: BoundaryPoint, opts: &MapOptions) -> Result<ConformalMap> {
    check_orientation(curve)?;
    let raw = interior_raw(curve, opts)?;
    normalize_at_anchor(raw, curve, anchor, opts.tol_map)
}

/// Exterior map `Φ₂: 𝔻* → G₂` normalized at `u₀`, via inversion about an
/// interior point unless a closed form applies.
pub fn solve_exterior_map(curve: &AnalyticCurve, anchor: BoundaryPoint, opts: &MapOptions) -> Result<ConformalMap> {
    check_orientation(curve)?;
    let raw = exterior_raw(curve, opts)?;
    normalize_at_anchor(raw, curve, anchor, opts.tol_map)
}

fn check_orientation(curve: &AnalyticCurve) -> Result<()> {
    if !curve.is_positive() {
        return Err(Error::InvalidCurve("curve must be positively oriented".into()));
    }
    Ok(())
}

/// The two normalized maps of one curve, anchored at the same point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapPair {
    pub curve: AnalyticCurve,
    pub anchor: BoundaryPoint,
    pub interior: ConformalMap,
    pub exterior: ConformalMap,
    /// Extension margin `δ₁` of the interior map.
    pub delta1: f64,
}

impl MapPair {
    pub fn solve(curve: &AnalyticCurve, t: f64, opts: &MapOptions) -> Result<Self> {
        let anchor = curve.boundary_point(t)?;
        let interior = solve_interior_map(curve, anchor, opts)?;
        let exterior = solve_exterior_map(curve, anchor, opts)?;
        let delta1 = interior.margin;
        Ok(Self { curve: curve.clone(), anchor, interior, exterior, delta1 })
    }

    pub fn map(&self, side: Side) -> &ConformalMap {
        match side {
            Side::Interior => &self.interior,
            Side::Exterior => &self.exterior,
        }
    }

    /// Maximum deviation of the two images of the unit circle from the curve.
    pub fn boundary_match(&self, m: usize) -> Result<f64> {
        Ok(self.interior.boundary_match(&self.curve, m)?.max(self.exterior.boundary_match(&self.curve, m)?))
    }
}

/// Open-up preimages of an arc point; thin re-export for the module map.
pub fn openup_preimages(arc: &crate::curves::ArcOpenUp, z0: C64) -> Result<(C64, C64)> {
    arc.preimages(z0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn unit_circle_maps_are_identity() {
        let curve = AnalyticCurve::unit_circle();
        let pair = MapPair::solve(&curve, 0.0, &MapOptions::default()).unwrap();
        for v in [c(0.3, 0.1), c(-0.5, 0.2), c(0.0, 0.0)] {
            assert!((pair.interior.eval(v).unwrap() - v).norm() < 1e-15);
            assert!((pair.interior.invert(v).unwrap() - v).norm() < 1e-14);
        }
        for v in [c(1.3, 0.1), c(-2.5, 0.2)] {
            assert!((pair.exterior.eval(v).unwrap() - v).norm() < 1e-15);
        }
        assert_eq!(pair.exterior.invert_ext(ExtPoint::Infinity).unwrap(), ExtPoint::Infinity);
    }

    #[test]
    fn radius_two_circle_normalization() {
        let curve = AnalyticCurve::circle(c(0.0, 0.0), 2.0).unwrap();
        let map = solve_interior_map(&curve, curve.boundary_point(0.0).unwrap(), &MapOptions::default()).unwrap();
        assert!((map.s - 1.0 / 3.0).abs() < 1e-15);
        let inv = map.check_invariants().unwrap();
        assert!(inv.passed(1e-13), "{inv:?}");
        // Φ(v) = 2 φ_{1/3}(v)
        let v = c(0.2, -0.4);
        assert!((map.eval(v).unwrap() - 2.0 * phi_s(1.0 / 3.0, v)).norm() < 1e-15);
        assert!((map.invert(c(1.0, 0.0)).unwrap() - phi_s(-1.0 / 3.0, c(0.5, 0.0))).norm() < 1e-14);
    }

    #[test]
    fn shifted_circle_exterior_is_translation() {
        let curve = AnalyticCurve::circle(c(5.0, 0.0), 1.0).unwrap();
        let map = solve_exterior_map(&curve, curve.boundary_point(0.0).unwrap(), &MapOptions::default()).unwrap();
        assert!((map.anchor.point - c(6.0, 0.0)).norm() < 1e-15);
        for v in [c(1.5, 0.0), c(0.0, 3.0), c(-2.0, -2.0)] {
            assert!((map.eval(v).unwrap() - (v + 5.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn identity_normalization_is_unchanged() {
        let curve = AnalyticCurve::unit_circle();
        let map = solve_interior_map(&curve, curve.boundary_point(0.0).unwrap(), &MapOptions::default()).unwrap();
        assert_eq!(map.s, 0.0);
        assert!((map.rotation - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rotated_anchor_on_circle() {
        let curve = AnalyticCurve::unit_circle();
        let t = 2.0;
        let map = solve_interior_map(&curve, curve.boundary_point(t).unwrap(), &MapOptions::default()).unwrap();
        assert!((map.rotation - C64::from_polar(1.0, t)).norm() < 1e-13);
        assert!(map.check_invariants().unwrap().passed(1e-12));
    }

    #[test]
    fn outside_domain_is_rejected() {
        let curve = AnalyticCurve::unit_circle();
        let pair = MapPair::solve(&curve, 0.0, &MapOptions::default()).unwrap();
        assert!(matches!(pair.interior.eval(c(3.0, 0.0)), Err(Error::OutsideDomain { .. })));
        assert!(matches!(pair.exterior.eval(c(0.1, 0.0)), Err(Error::OutsideDomain { .. })));
        assert!(pair.delta1 > 0.0 && pair.delta1 <= MAX_MARGIN);
    }

    #[test]
    fn normalized_margin_matches_direct_reach() {
        let s = 0.3;
        let raw_r = 1.4;
        let d = normalized_margin(Side::Interior, s, raw_r);
        let r = 1.0 + d;
        let reach = phi_s(s, c(r, 0.0)).norm().max(phi_s(s, c(-r, 0.0)).norm());
        assert!(reach <= raw_r + 1e-9);
        let d = normalized_margin(Side::Exterior, -0.2, 0.7);
        let r = 1.0 - d;
        let reach = phi_s(-0.2, c(r, 0.0)).norm().min(phi_s(-0.2, c(-r, 0.0)).norm());
        assert!(reach >= 0.7 - 1e-9);
    }
}
