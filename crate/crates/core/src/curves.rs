//! Analytic Jordan curves carried by finite Fourier data, their normals, and
//! the open-up of analytic arcs onto curves.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{fmt_c, Error, Result};
use crate::mobius::{ExtPoint, Mobius};
use crate::{C64, I};

/// Speeds below this are treated as a degenerate tangent.
pub const SPEED_FLOOR: f64 = 1e-12;

/// A closed, 2π-periodic parametrized curve.
pub trait ClosedCurve {
    fn point(&self, t: f64) -> C64;
    fn tangent(&self, t: f64) -> C64;
}

/// Closed-form shape tags used to pick exact conformal maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Circle { center: C64, radius: f64 },
    /// `a cos t + i b sin t`, centred at the origin.
    Ellipse { a: f64, b: f64 },
    Trig,
}

/// `γ(t) = Σ c_k e^{ikt}` for finitely many integer `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticCurve {
    coeffs: Vec<(i32, C64)>,
    shape: Shape,
    positive: bool,
}

impl AnalyticCurve {
    /// Builds a curve from `(k, c_k)` pairs; repeated `k` are summed.
    pub fn trig(coeffs: &[(i32, C64)]) -> Result<Self> {
        let mut merged: Vec<(i32, C64)> = Vec::new();
        for &(k, c) in coeffs {
            if !c.is_finite() {
                return Err(Error::InvalidCurve(format!("non-finite coefficient for k = {k}")));
            }
            match merged.iter_mut().find(|(j, _)| *j == k) {
                Some(entry) => entry.1 += c,
                None => merged.push((k, c)),
            }
        }
        merged.retain(|(k, c)| *k == 0 || c.norm() > 0.0);
        merged.sort_by_key(|(k, _)| *k);
        if merged.iter().all(|(k, _)| *k == 0) {
            return Err(Error::InvalidCurve("curve has no oscillating terms".into()));
        }
        let mut curve = Self { coeffs: merged, shape: Shape::Trig, positive: true };
        curve.positive = curve.winding_number(curve.centroid(1024), 1024) >= 0.0;
        Ok(curve)
    }

    pub fn unit_circle() -> Self {
        Self::circle(C64::new(0.0, 0.0), 1.0).expect("unit circle is valid")
    }

    pub fn circle(center: C64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() || !center.is_finite() {
            return Err(Error::InvalidCurve(format!("bad circle radius {radius}")));
        }
        Ok(Self {
            coeffs: vec![(0, center), (1, C64::new(radius, 0.0))],
            shape: Shape::Circle { center, radius },
            positive: true,
        })
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidCurve(format!("bad ellipse semi-axes {a}, {b}")));
        }
        if a == b {
            let mut c = Self::circle(C64::new(0.0, 0.0), a)?;
            c.shape = Shape::Ellipse { a, b };
            return Ok(c);
        }
        Ok(Self {
            coeffs: vec![(-1, C64::new((a - b) / 2.0, 0.0)), (1, C64::new((a + b) / 2.0, 0.0))],
            shape: Shape::Ellipse { a, b },
            positive: true,
        })
    }

    pub fn coeffs(&self) -> &[(i32, C64)] {
        &self.coeffs
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Positive (counter-clockwise) orientation as measured at construction.
    pub fn is_positive(&self) -> bool {
        self.positive
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.coeffs
            .iter()
            .map(|&(k, c)| c * C64::from_polar(1.0, k as f64 * t))
            .sum()
    }

    pub fn derivative(&self, t: f64) -> C64 {
        self.coeffs
            .iter()
            .map(|&(k, c)| c * I * k as f64 * C64::from_polar(1.0, k as f64 * t))
            .sum()
    }

    pub fn second_derivative(&self, t: f64) -> C64 {
        self.coeffs
            .iter()
            .map(|&(k, c)| -c * (k * k) as f64 * C64::from_polar(1.0, k as f64 * t))
            .sum()
    }

    /// Unit inward normal `n₁` and outward normal `n₂ = −n₁` at `γ(t)`.
    pub fn unit_normals(&self, t: f64) -> Result<(C64, C64)> {
        let d = self.derivative(t);
        let speed = d.norm();
        if speed < SPEED_FLOOR {
            return Err(Error::DegenerateTangent { t, speed });
        }
        // Interior lies to the left of the direction of travel.
        let n1 = if self.positive { I * d / speed } else { -I * d / speed };
        Ok((n1, -n1))
    }

    pub fn boundary_point(&self, t: f64) -> Result<BoundaryPoint> {
        let (n1, n2) = self.unit_normals(t)?;
        Ok(BoundaryPoint { t, point: self.eval(t), n1, n2 })
    }

    /// `γ(2πj/m)` for `j = 0..m`.
    pub fn samples(&self, m: usize) -> Vec<C64> {
        (0..m).map(|j| self.eval(TAU * j as f64 / m as f64)).collect()
    }

    /// Area centroid of the sampled polygon.
    pub fn centroid(&self, m: usize) -> C64 {
        polygon_centroid(&self.samples(m))
    }

    /// Winding number of the sampled polygon about `z` (a real number, close
    /// to an integer unless `z` is near the curve).
    pub fn winding_number(&self, z: C64, m: usize) -> f64 {
        polygon_winding(&self.samples(m), z)
    }

    /// Whether `z` lies in the bounded complementary component.
    pub fn encloses(&self, z: C64) -> bool {
        if let Shape::Circle { center, radius } = self.shape {
            return (z - center).norm() < radius;
        }
        self.winding_number(z, 2048).abs() > 0.5
    }

    /// Distance from `z` to the curve and the closest parameter.
    pub fn distance_to(&self, z: C64) -> (f64, f64) {
        let m = 1024;
        let mut best = (f64::INFINITY, 0.0);
        for j in 0..m {
            let t = TAU * j as f64 / m as f64;
            let d = (self.eval(t) - z).norm();
            if d < best.0 {
                best = (d, t);
            }
        }
        let h = TAU / m as f64;
        let mut t = best.1;
        for _ in 0..50 {
            let e = self.eval(t) - z;
            let d1 = self.derivative(t);
            let d2 = self.second_derivative(t);
            let g = (e.conj() * d1).re;
            let hess = d1.norm_sqr() + (e.conj() * d2).re;
            if hess <= 0.0 {
                break;
            }
            let step = (g / hess).clamp(-h, h);
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let d = (self.eval(t) - z).norm();
        if d < best.0 {
            (d, t.rem_euclid(TAU))
        } else {
            best
        }
    }

    /// Stable hash of the Fourier data, used for map caching.
    pub fn fingerprint(&self) -> String {
        let mut s = String::new();
        for (k, c) in &self.coeffs {
            s.push_str(&format!("{k}:{:016x}:{:016x};", c.re.to_bits(), c.im.to_bits()));
        }
        s
    }
}

impl ClosedCurve for AnalyticCurve {
    fn point(&self, t: f64) -> C64 {
        self.eval(t)
    }
    fn tangent(&self, t: f64) -> C64 {
        self.derivative(t)
    }
}

/// A point of the curve with its two unit normals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub t: f64,
    pub point: C64,
    /// Inward unit normal.
    pub n1: C64,
    /// Outward unit normal.
    pub n2: C64,
}

/// Outcome of the sampled Jordan-curve checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub grid: usize,
    pub min_speed: f64,
    pub speed_ok: bool,
    pub self_intersections: usize,
    /// Minimum over sample pairs of chord length divided by the shorter arc length.
    pub min_chord_ratio: f64,
    pub simple: bool,
    pub winding: f64,
    pub positively_oriented: bool,
}

impl ValidityReport {
    pub fn passed(&self) -> bool {
        self.speed_ok && self.simple && self.positively_oriented
    }
}

/// Sampled check of regularity, simplicity and orientation on an `m`-point grid.
pub fn validate_curve(curve: &AnalyticCurve, m: usize) -> Result<ValidityReport> {
    if m < 64 {
        return Err(Error::InvalidInput(format!("validation grid must have at least 64 points, got {m}")));
    }
    let pts = curve.samples(m);
    let min_speed = (0..m)
        .map(|j| curve.derivative(TAU * j as f64 / m as f64).norm())
        .fold(f64::INFINITY, f64::min);
    let self_intersections = polygon_self_intersections(&pts);
    let min_chord_ratio = min_chord_ratio(&pts);
    let winding = polygon_winding(&pts, polygon_centroid(&pts));
    Ok(ValidityReport {
        grid: m,
        min_speed,
        speed_ok: min_speed > SPEED_FLOOR,
        self_intersections,
        min_chord_ratio,
        simple: self_intersections == 0 && min_chord_ratio > 1e-6,
        winding,
        positively_oriented: (winding - 1.0).abs() < 1e-6,
    })
}

pub(crate) fn polygon_centroid(pts: &[C64]) -> C64 {
    let n = pts.len();
    let mut area = 0.0;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        let p = pts[j];
        let q = pts[(j + 1) % n];
        let cross = p.re * q.im - q.re * p.im;
        area += cross;
        acc += (p + q) * cross;
    }
    if area.abs() < 1e-300 {
        return pts.iter().sum::<C64>() / n as f64;
    }
    acc / (3.0 * area)
}

pub(crate) fn polygon_winding(pts: &[C64], z: C64) -> f64 {
    let n = pts.len();
    let mut total = 0.0;
    for j in 0..n {
        let a = pts[j] - z;
        let b = pts[(j + 1) % n] - z;
        total += (b / a).arg();
    }
    total / TAU
}

fn orient(a: C64, b: C64, c: C64) -> f64 {
    (b - a).re * (c - a).im - (b - a).im * (c - a).re
}

fn segments_cross(p1: C64, p2: C64, q1: C64, q2: C64) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Number of crossing pairs of non-adjacent edges of the closed polygon.
pub(crate) fn polygon_self_intersections(pts: &[C64]) -> usize {
    let n = pts.len();
    let bbox: Vec<(f64, f64, f64, f64)> = (0..n)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            (a.re.min(b.re), a.re.max(b.re), a.im.min(b.im), a.im.max(b.im))
        })
        .collect();
    let mut count = 0;
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (bi, bj) = (bbox[i], bbox[j]);
            if bi.1 < bj.0 || bj.1 < bi.0 || bi.3 < bj.2 || bj.3 < bi.2 {
                continue;
            }
            if segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                count += 1;
            }
        }
    }
    count
}

fn min_chord_ratio(pts: &[C64]) -> f64 {
    let n = pts.len();
    let mut prefix = vec![0.0; n + 1];
    for j in 0..n {
        prefix[j + 1] = prefix[j] + (pts[(j + 1) % n] - pts[j]).norm();
    }
    let total = prefix[n];
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let along = prefix[j] - prefix[i];
            let arc = along.min(total - along);
            if arc <= 0.0 {
                continue;
            }
            best = best.min((pts[j] - pts[i]).norm() / arc);
        }
    }
    best
}

/// Joukowski map `J(u) = (u + 1/u) / 2`.
pub fn joukowski(u: C64) -> C64 {
    (u + u.inv()) * 0.5
}

pub fn joukowski_derivative(u: C64) -> C64 {
    (C64::new(1.0, 0.0) - (u * u).inv()) * 0.5
}

/// An analytic arc `Γ₀ = M([−1, 1])` together with its open-up
/// `F = M ∘ J`, which maps both the interior and the exterior of the unit
/// circle conformally onto the complement of the arc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcOpenUp {
    base: AnalyticCurve,
    outer: Mobius,
}

impl ArcOpenUp {
    /// `[−1, 1]` opened up by the plain Joukowski map.
    pub fn segment() -> Self {
        Self { base: AnalyticCurve::unit_circle(), outer: Mobius::identity() }
    }

    /// The straight segment from `p` to `q`.
    pub fn segment_between(p: C64, q: C64) -> Result<Self> {
        if (p - q).norm() < 1e-14 {
            return Err(Error::InvalidInput("segment endpoints coincide".into()));
        }
        Self::from_mobius(Mobius::affine((q - p) * 0.5, (p + q) * 0.5)?)
    }

    /// The arc of the circle `|z − center| = radius` from angle `theta1` to
    /// `theta2` (counter-clockwise; `theta2 − theta1 ∈ (0, 2π)`).
    pub fn circular_arc(center: C64, radius: f64, theta1: f64, theta2: f64) -> Result<Self> {
        let span = theta2 - theta1;
        if !(radius > 0.0) || !(span > 0.0 && span < TAU) {
            return Err(Error::InvalidInput(format!(
                "circular arc needs radius > 0 and angular span in (0, 2π), got {radius}, {span}"
            )));
        }
        let p = |th: f64| center + C64::from_polar(radius, th);
        let m = Mobius::from_three_points(
            [C64::new(-1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [p(theta1), p(theta1 + span / 2.0), p(theta2)],
        )?;
        Self::from_mobius(m)
    }

    /// Arc `M([−1, 1])`; `M` must keep `[−1, 1]` away from its pole.
    pub fn from_mobius(outer: Mobius) -> Result<Self> {
        if let ExtPoint::Finite(p) = outer.pole() {
            if p.im.abs() < 1e-12 && p.re.abs() <= 1.0 + 1e-12 {
                return Err(Error::InvalidInput("Möbius map sends a point of [−1, 1] to ∞".into()));
            }
        }
        Ok(Self { base: AnalyticCurve::unit_circle(), outer })
    }

    pub fn base(&self) -> &AnalyticCurve {
        &self.base
    }

    pub fn outer(&self) -> &Mobius {
        &self.outer
    }

    /// `F(u) = M(J(u))`.
    pub fn eval(&self, u: C64) -> C64 {
        self.outer.eval(joukowski(u))
    }

    pub fn derivative(&self, u: C64) -> C64 {
        self.outer.derivative(joukowski(u)) * joukowski_derivative(u)
    }

    /// Point of the arc with coordinate `x ∈ [−1, 1]`.
    pub fn arc_point(&self, x: f64) -> C64 {
        self.outer.eval(C64::new(x, 0.0))
    }

    /// Coordinate `x` of an arc point; errors if `z` is off the arc.
    pub fn arc_coordinate(&self, z: C64) -> Result<f64> {
        let x = match self.outer.inverse().apply(ExtPoint::Finite(z)) {
            ExtPoint::Finite(x) => x,
            ExtPoint::Infinity => return Err(Error::NotOnArc(fmt_c(z))),
        };
        let scale = 1e-9 * (1.0 + z.norm());
        if x.im.abs() > scale || x.re.abs() > 1.0 + scale {
            return Err(Error::NotOnArc(fmt_c(z)));
        }
        Ok(x.re.clamp(-1.0, 1.0))
    }

    /// Unit normals `(n₁, n₂)` of the arc at coordinate `x`; `n₁` points to
    /// the left of the direction from `M(−1)` to `M(1)`.
    pub fn arc_normals(&self, x: f64) -> (C64, C64) {
        let d = self.outer.derivative(C64::new(x, 0.0));
        let tau = d / d.norm();
        (I * tau, -I * tau)
    }

    /// The two preimages `(u₁, u₂)` on the unit circle of an interior arc
    /// point, ordered so that `F` carries the outward normal at `u₁` to `n₂(z₀)`.
    pub fn preimages(&self, z0: C64) -> Result<(C64, C64)> {
        let x = self.arc_coordinate(z0)?;
        if 1.0 - x.abs() < 1e-12 {
            return Err(Error::ArcEndpoint(fmt_c(z0)));
        }
        let theta = x.acos();
        let upper = C64::from_polar(1.0, theta);
        let lower = C64::from_polar(1.0, -theta);
        let (_, n2) = self.arc_normals(x);
        // Outward normal of the unit circle at u is u itself.
        let pushed = self.derivative(lower) * lower;
        if (pushed * n2.conj()).re > 0.0 {
            Ok((lower, upper))
        } else {
            Ok((upper, lower))
        }
    }

    /// Preimage of `b` in the interior (`inside = true`) or exterior of the unit circle.
    pub fn branch_inverse(&self, b: ExtPoint, inside: bool) -> Result<ExtPoint> {
        let x = match self.outer.inverse().apply(b) {
            ExtPoint::Infinity => {
                return Ok(if inside { ExtPoint::Finite(C64::new(0.0, 0.0)) } else { ExtPoint::Infinity })
            }
            ExtPoint::Finite(x) => x,
        };
        let root = (x * x - 1.0).sqrt();
        let r1 = x + root;
        let r2 = x - root;
        let (small, large) = if r1.norm() <= r2.norm() { (r1, r2) } else { (r2, r1) };
        if (small.norm() - 1.0).abs() < 1e-12 {
            return Err(Error::PoleOnCurve { pole: b.to_string(), dist: 0.0 });
        }
        Ok(ExtPoint::Finite(if inside { small } else { large }))
    }

    /// Sampled check of the open-up invariants at coordinate `x`.
    pub fn check(&self, x: f64, m: usize) -> Result<OpenUpReport> {
        let z0 = self.arc_point(x);
        let (u1, u2) = self.preimages(z0)?;
        let mut injective = true;
        for radius in [0.5, 0.9, 1.1, 2.0] {
            let img: Vec<C64> = (0..m)
                .map(|j| self.eval(C64::from_polar(radius, TAU * j as f64 / m as f64)))
                .collect();
            injective &= polygon_self_intersections(&img) == 0;
        }
        Ok(OpenUpReport {
            injective_on_samples: injective,
            preimage_residual: (self.eval(u1) - z0).norm().max((self.eval(u2) - z0).norm()),
            preimage_gap: (u1 - u2).norm(),
            min_derivative: self.derivative(u1).norm().min(self.derivative(u2).norm()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpenUpReport {
    pub injective_on_samples: bool,
    pub preimage_residual: f64,
    pub preimage_gap: f64,
    pub min_derivative: f64,
}

/// `θ ↦ e^{iθ}` on a uniform grid, the natural sampling of the base circle.
pub fn circle_grid(m: usize) -> impl Iterator<Item = C64> {
    (0..m).map(move |j| C64::from_polar(1.0, TAU * j as f64 / m as f64))
}
