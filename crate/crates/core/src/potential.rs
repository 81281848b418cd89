//! Green's functions, boundary normal derivatives and the derivative bound.
//!
//! For the disk, `g(v, a) = log|B(a, v)|` with `B(a, v) = (1 − ā v)/(v − a)`,
//! and `g(v, ∞) = log|v|` on the exterior. General domains are handled by
//! pullback through the anchored Riemann maps, which preserve normal
//! derivatives at the anchor because `|Φⱼ'(1)| = 1`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::conformal::{MapPair, Side};
use crate::curves::ArcOpenUp;
use crate::error::{fmt_c, Error, Result};
use crate::mobius::ExtPoint;
use crate::ratfun::{sup_norm, sup_norm_on, PoleSet, RationalFunction, SupOptions};
use crate::C64;

/// Closest approach to the unit circle accepted for a pulled-back pole.
const CIRCLE_FLOOR: f64 = 1e-12;

fn check_side(pole: ExtPoint, side: Side) -> Result<()> {
    let r = pole.norm();
    if (r - 1.0).abs() < CIRCLE_FLOOR {
        return Err(Error::OnUnitCircle { point: pole.to_string() });
    }
    match side {
        Side::Interior if r < 1.0 => Ok(()),
        Side::Exterior if r > 1.0 => Ok(()),
        _ => Err(Error::InvalidInput(format!("pole {pole} is not on the {side:?} side of the unit circle"))),
    }
}

/// Normal derivative at `ζ ∈ ∂𝔻` of the disk Green's function with pole
/// `pole`, taken along the normal pointing into `side`.
pub fn disk_normal_derivative_at(zeta: C64, pole: ExtPoint, side: Side) -> Result<f64> {
    check_side(pole, side)?;
    Ok(match (side, pole) {
        (_, ExtPoint::Infinity) => 1.0,
        (Side::Interior, ExtPoint::Finite(a)) => (1.0 - a.norm_sqr()) / (zeta - a).norm_sqr(),
        (Side::Exterior, ExtPoint::Finite(b)) => (b.norm_sqr() - 1.0) / (zeta - b).norm_sqr(),
    })
}

/// `(1 − |α|²)/|1 − α|²` (interior) or `(|β|² − 1)/|1 − β|²` (exterior, 1 at ∞).
pub fn disk_normal_derivative(pole: ExtPoint, side: Side) -> Result<f64> {
    disk_normal_derivative_at(C64::new(1.0, 0.0), pole, side)
}

/// Green's function of `𝔻` or `𝔻*` at `v` with pole `pole`.
pub fn green_disk(v: C64, pole: ExtPoint, side: Side) -> Result<f64> {
    check_side(pole, side)?;
    match pole {
        ExtPoint::Infinity => Ok(v.norm().ln()),
        ExtPoint::Finite(a) => {
            let d = v - a;
            if d.norm() == 0.0 {
                return Err(Error::NearPole { at: fmt_c(v), dist: 0.0 });
            }
            Ok(((1.0 - a.conj() * v) / d).norm().ln())
        }
    }
}

fn pullback(maps: &MapPair, side: Side, pole: ExtPoint) -> Result<ExtPoint> {
    maps.map(side).invert_ext(pole)
}

/// Normal derivative at the anchor of `g_{Gⱼ}(·, pole)`, by pullback.
pub fn domain_normal_derivative(pole: ExtPoint, side: Side, maps: &MapPair) -> Result<f64> {
    disk_normal_derivative(pullback(maps, side, pole)?, side)
}

/// `g_{Gⱼ}(u, pole)`; zero when `u` is on the other side of the curve.
pub fn green_domain(u: C64, pole: ExtPoint, side: Side, maps: &MapPair) -> Result<f64> {
    let inside = maps.curve.encloses(u);
    if inside != (side == Side::Interior) {
        return Ok(0.0);
    }
    let v = maps.map(side).invert(u)?;
    green_disk(v, pullback(maps, side, pole)?, side)
}

/// One-sided normals of an arc: `N1` is the side `n₁(z₀)` points into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ArcSide {
    N1,
    N2,
}

/// Normal derivative at an arc point of `g_{C∞∖Γ₀}(·, b)`, transferred
/// from the unit circle through the open-up map. `via_exterior` selects the
/// equivalent `G₂` form.
pub fn arc_normal_derivative_with(
    z0: C64,
    side: ArcSide,
    pole: ExtPoint,
    arc: &ArcOpenUp,
    via_exterior: bool,
) -> Result<f64> {
    let (u1, u2) = arc.preimages(z0)?;
    let (u, map_side) = match (side, via_exterior) {
        (ArcSide::N1, false) => (u1, Side::Interior),
        (ArcSide::N1, true) => (u2, Side::Exterior),
        (ArcSide::N2, false) => (u2, Side::Interior),
        (ArcSide::N2, true) => (u1, Side::Exterior),
    };
    let b = arc.branch_inverse(pole, map_side == Side::Interior)?;
    Ok(disk_normal_derivative_at(u, b, map_side)? / arc.derivative(u).norm())
}

pub fn arc_normal_derivative(z0: C64, side: ArcSide, pole: ExtPoint, arc: &ArcOpenUp) -> Result<f64> {
    arc_normal_derivative_with(z0, side, pole, arc, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SumSide {
    Inner,
    Outer,
}

impl SumSide {
    fn label(self) -> &'static str {
        match self {
            SumSide::Inner => "inner",
            SumSide::Outer => "outer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Contribution {
    pub pole: ExtPoint,
    pub side: SumSide,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub point: C64,
    /// One entry per pole, multiplicities expanded.
    pub contributions: Vec<Contribution>,
    pub inner: f64,
    pub outer: f64,
    pub bound: f64,
}

impl BoundReport {
    fn assemble(point: C64, contributions: Vec<Contribution>) -> Self {
        let sum = |s: SumSide| contributions.iter().filter(|c| c.side == s).map(|c| c.value).sum::<f64>();
        let inner = sum(SumSide::Inner);
        let outer = sum(SumSide::Outer);
        Self { point, contributions, inner, outer, bound: inner.max(outer) }
    }

    /// Contributions are positive and the sums and maximum are consistent.
    pub fn is_consistent(&self) -> bool {
        let again = Self::assemble(self.point, self.contributions.clone());
        self.contributions.iter().all(|c| c.value > 0.0)
            && again.inner == self.inner
            && again.outer == self.outer
            && self.bound == self.inner.max(self.outer)
    }

    /// `pole_re,pole_im,side,contribution` rows, then a summary row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pole_re,pole_im,side,contribution\n");
        for c in &self.contributions {
            let (re, im) = match c.pole {
                ExtPoint::Finite(z) => (fmt_num(z.re), fmt_num(z.im)),
                ExtPoint::Infinity => ("inf".to_string(), "inf".to_string()),
            };
            let _ = writeln!(out, "{re},{im},{},{}", c.side.label(), fmt_num(c.value));
        }
        let _ = writeln!(out, "inner_sum,outer_sum,bound\n{},{},{}", fmt_num(self.inner), fmt_num(self.outer), fmt_num(self.bound));
        out
    }
}

/// Twelve significant digits, scientific, no negative zero.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return format!("{:.11e}", 0.0);
    }
    format!("{x:.11e}")
}

/// `max(Σ_α ∂g_{G₁}/∂n₁, Σ_β ∂g_{G₂}/∂n₂)` at the anchor of `maps`.
pub fn bernstein_bound(poles: &PoleSet, maps: &MapPair) -> Result<BoundReport> {
    let classified = poles.classify(&maps.curve)?;
    let mut contributions = Vec::with_capacity(poles.total());
    let mut push = |pole: ExtPoint, side: Side, m: usize| -> Result<()> {
        let value = domain_normal_derivative(pole, side, maps).map_err(|e| pole_error(pole, e))?;
        let side = if side == Side::Interior { SumSide::Inner } else { SumSide::Outer };
        contributions.extend(std::iter::repeat_n(Contribution { pole, side, value }, m));
        Ok(())
    };
    for &(a, m) in &classified.inner {
        push(ExtPoint::Finite(a), Side::Interior, m)?;
    }
    for &(b, m) in &classified.outer {
        push(b, Side::Exterior, m)?;
    }
    Ok(BoundReport::assemble(maps.anchor.point, contributions))
}

fn pole_error(pole: ExtPoint, e: Error) -> Error {
    match e {
        Error::NotConverged { what, residual } => Error::NotConverged { what: format!("{what} (pole {pole})"), residual },
        Error::OutsideDomain { arg } => Error::OutsideDomain { arg: format!("{arg} (pole {pole})") },
        other => other,
    }
}

/// Both one-sided sums over all poles at the arc point `z0`.
pub fn arc_bound(z0: C64, poles: &PoleSet, arc: &ArcOpenUp) -> Result<BoundReport> {
    let mut contributions = Vec::with_capacity(2 * poles.total());
    for (side, label) in [(ArcSide::N1, SumSide::Inner), (ArcSide::N2, SumSide::Outer)] {
        for &(b, m) in &poles.points {
            let value = arc_normal_derivative(z0, side, b, arc)?;
            contributions.extend(std::iter::repeat_n(Contribution { pole: b, side: label, value }, m));
        }
    }
    Ok(BoundReport::assemble(z0, contributions))
}

/// Where a derivative is measured.
pub enum Target<'a> {
    Curve(&'a MapPair),
    /// Arc with the point given by its arc coordinate.
    Arc(&'a ArcOpenUp, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioRecord {
    pub deriv_mod: f64,
    pub sup_norm: f64,
    pub bound: f64,
    pub ratio: f64,
    pub rough_ratio: f64,
    pub degree: usize,
}

/// `|f'|/(‖f‖·bound)` and `|f'|/(deg f·‖f‖)`.
pub fn verify_ratio(f: &RationalFunction, target: &Target<'_>, sup: &SupOptions) -> Result<RatioRecord> {
    let poles = PoleSet::new(f.poles());
    let (deriv, norm, report) = match target {
        Target::Curve(maps) => {
            let d = f.derivative(maps.anchor.point)?.norm();
            let s = sup_norm(f, &maps.curve, sup)?.value;
            (d, s, bernstein_bound(&poles, maps)?)
        }
        Target::Arc(arc, x) => {
            let z0 = arc.arc_point(*x);
            for &(b, _) in &poles.points {
                let inner = arc.branch_inverse(b, true)?;
                if (inner.norm() - 1.0).abs() < 1e-9 {
                    return Err(Error::PoleOnCurve { pole: b.to_string(), dist: 0.0 });
                }
            }
            let d = f.derivative(z0)?.norm();
            let s = sup_norm_on(f, &|t| arc.eval(C64::from_polar(1.0, t)), sup)?.value;
            (d, s, arc_bound(z0, &poles, arc)?)
        }
    };
    let degree = f.degree();
    Ok(RatioRecord {
        deriv_mod: deriv,
        sup_norm: norm,
        bound: report.bound,
        ratio: deriv / (norm * report.bound),
        rough_ratio: deriv / (degree as f64 * norm),
        degree,
    })
}

/// `‖f‖_Γ · exp(Σ g(u, pole))`, the Green's functions extended by zero
/// across the curve.
pub fn bernstein_walsh_majorant(f: &RationalFunction, u: C64, sup: f64, maps: &MapPair) -> Result<f64> {
    let classified = PoleSet::new(f.poles()).classify(&maps.curve)?;
    let mut total = 0.0;
    for &(a, m) in &classified.inner {
        total += m as f64 * green_domain(u, ExtPoint::Finite(a), Side::Interior, maps)?;
    }
    for &(b, m) in &classified.outer {
        total += m as f64 * green_domain(u, b, Side::Exterior, maps)?;
    }
    Ok(sup * total.exp())
}

/// `max g_{G₂}(Φ₁(v), β)/(|v| − 1)` over `angles × 16` points with
/// `1 < |v| ≤ 1 + δ₁`, maximised over `poles`.
pub fn near_boundary_growth(maps: &MapPair, poles: &[ExtPoint], angles: usize) -> Result<f64> {
    let delta = maps.delta1;
    let pulled: Vec<ExtPoint> = poles.iter().map(|&b| pullback(maps, Side::Exterior, b)).collect::<Result<_>>()?;
    let per_radius: Vec<f64> = (1..=16)
        .into_par_iter()
        .map(|i| {
            let r = 1.0 + delta * i as f64 / 16.0;
            let mut best: f64 = 0.0;
            for j in 0..angles {
                let v = C64::from_polar(r, std::f64::consts::TAU * j as f64 / angles as f64);
                let w = maps.exterior.invert(maps.interior.eval(v)?)?;
                for &b in &pulled {
                    best = best.max(green_disk(w, b, Side::Exterior)? / (r - 1.0));
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    Ok(per_radius.into_iter().fold(0.0, f64::max))
}
