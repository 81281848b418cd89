//! Rational functions in partial-fraction form.

mod blaschke;
mod principal;
mod supnorm;

pub use blaschke::{blaschke_product, BlaschkeProduct};
pub use principal::{laurent_principal, principal_parts, ContourSample, QuadratureOptions};
pub use supnorm::{sup_norm, sup_norm_on, SupNorm, SupOptions};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curves::AnalyticCurve;
use crate::error::{fmt_c, Error, Result};
use crate::mobius::ExtPoint;
use crate::C64;

/// Evaluation guard around finite poles.
pub const POLE_FLOOR: f64 = 1e-9;

/// Anything that can be evaluated on a boundary.
pub trait ComplexFn: Sync {
    fn value(&self, u: C64) -> Result<C64>;

    /// Degree used to scale sampling densities.
    fn degree_hint(&self) -> usize {
        0
    }
}

/// Wraps a closure as a [`ComplexFn`].
pub struct FnEval<F>(pub F);

impl<F: Fn(C64) -> Result<C64> + Sync> ComplexFn for FnEval<F> {
    fn value(&self, u: C64) -> Result<C64> {
        (self.0)(u)
    }
}

/// `Σ_k coeffs[k] (u − at)^{−(k+1)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleTerm {
    pub at: C64,
    pub coeffs: Vec<C64>,
}

impl PoleTerm {
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    fn eval(&self, u: C64) -> C64 {
        let w = (u - self.at).inv();
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| (acc + c) * w)
    }

    fn derivative(&self, u: C64) -> C64 {
        let w = (u - self.at).inv();
        let mut acc = C64::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            acc = (acc - c * (k + 1) as f64) * w;
        }
        acc * w
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RationalFunction {
    poles: Vec<PoleTerm>,
    /// Polynomial part, ascending powers.
    poly: Vec<C64>,
}

fn trim(coeffs: &mut Vec<C64>) {
    while coeffs.last().map(|c| c.norm() == 0.0).unwrap_or(false) {
        coeffs.pop();
    }
}

impl RationalFunction {
    pub fn new(poles: Vec<PoleTerm>, poly: Vec<C64>) -> Result<Self> {
        let mut kept = Vec::with_capacity(poles.len());
        for mut p in poles {
            if !p.at.is_finite() || p.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite pole term at {}", fmt_c(p.at))));
            }
            trim(&mut p.coeffs);
            if !p.coeffs.is_empty() {
                kept.push(p);
            }
        }
        for i in 0..kept.len() {
            for j in 0..i {
                if kept[i].at == kept[j].at {
                    return Err(Error::InvalidInput(format!("repeated pole location {}", fmt_c(kept[i].at))));
                }
            }
        }
        let mut poly = poly;
        if poly.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite polynomial coefficient".into()));
        }
        trim(&mut poly);
        Ok(Self { poles: kept, poly })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn polynomial(coeffs: Vec<C64>) -> Result<Self> {
        Self::new(Vec::new(), coeffs)
    }

    /// `c / (u − a)^order`.
    pub fn monomial_pole(a: C64, order: usize, c: C64) -> Result<Self> {
        let mut coeffs = vec![C64::new(0.0, 0.0); order];
        if order > 0 {
            coeffs[order - 1] = c;
        }
        Self::new(vec![PoleTerm { at: a, coeffs }], Vec::new())
    }

    pub fn pole_terms(&self) -> &[PoleTerm] {
        &self.poles
    }

    pub fn poly(&self) -> &[C64] {
        &self.poly
    }

    /// Order of the pole at ∞.
    pub fn poly_degree(&self) -> usize {
        self.poly.len().saturating_sub(1)
    }

    pub fn degree(&self) -> usize {
        self.poles.iter().map(PoleTerm::order).sum::<usize>() + self.poly_degree()
    }

    /// All poles with their orders, ∞ last.
    pub fn poles(&self) -> Vec<(ExtPoint, usize)> {
        let mut out: Vec<(ExtPoint, usize)> = self.poles.iter().map(|p| (ExtPoint::Finite(p.at), p.order())).collect();
        if self.poly_degree() > 0 {
            out.push((ExtPoint::Infinity, self.poly_degree()));
        }
        out
    }

    fn guard(&self, u: C64) -> Result<()> {
        for p in &self.poles {
            let d = (u - p.at).norm();
            if d < POLE_FLOOR {
                return Err(Error::NearPole { at: fmt_c(u), dist: d });
            }
        }
        Ok(())
    }

    pub fn eval(&self, u: C64) -> Result<C64> {
        self.guard(u)?;
        Ok(self.eval_unchecked(u))
    }

    pub fn derivative(&self, u: C64) -> Result<C64> {
        self.guard(u)?;
        let mut acc = C64::new(0.0, 0.0);
        for k in (1..self.poly.len()).rev() {
            acc = acc * u + self.poly[k] * k as f64;
        }
        Ok(acc + self.poles.iter().map(|p| p.derivative(u)).sum::<C64>())
    }

    pub(crate) fn eval_unchecked(&self, u: C64) -> C64 {
        let poly = self.poly.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * u + c);
        poly + self.poles.iter().map(|p| p.eval(u)).sum::<C64>()
    }

    /// Value at ∞ when finite.
    pub fn value_at_infinity(&self) -> Option<C64> {
        match self.poly.len() {
            0 => Some(C64::new(0.0, 0.0)),
            1 => Some(self.poly[0]),
            _ => None,
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        let poles = self
            .poles
            .iter()
            .map(|p| PoleTerm { at: p.at, coeffs: p.coeffs.iter().map(|x| x * c).collect() })
            .collect();
        Self::new(poles, self.poly.iter().map(|x| x * c).collect()).expect("scaling keeps the structure valid")
    }

    /// Term-wise sum; coinciding pole locations are merged.
    pub fn add(&self, other: &Self) -> Self {
        let mut poles = self.poles.clone();
        for q in &other.poles {
            if let Some(p) = poles.iter_mut().find(|p| p.at == q.at) {
                if p.coeffs.len() < q.coeffs.len() {
                    p.coeffs.resize(q.coeffs.len(), C64::new(0.0, 0.0));
                }
                for (k, c) in q.coeffs.iter().enumerate() {
                    p.coeffs[k] += c;
                }
            } else {
                poles.push(q.clone());
            }
        }
        let n = self.poly.len().max(other.poly.len());
        let poly = (0..n)
            .map(|k| self.poly.get(k).copied().unwrap_or_default() + other.poly.get(k).copied().unwrap_or_default())
            .collect();
        Self::new(poles, poly).expect("sum of valid functions is valid")
    }

    /// `(f₁, f₂)`: interior pole terms, and everything else.
    pub fn split_inside_outside(&self, curve: &AnalyticCurve) -> Result<(Self, Self)> {
        let mut inner = Vec::new();
        let mut outer = Vec::new();
        for p in &self.poles {
            match classify_point(curve, p.at)? {
                PoleSide::Inside => inner.push(p.clone()),
                PoleSide::Outside => outer.push(p.clone()),
            }
        }
        Ok((Self::new(inner, Vec::new())?, Self::new(outer, self.poly.clone())?))
    }
}

impl ComplexFn for RationalFunction {
    fn value(&self, u: C64) -> Result<C64> {
        self.eval(u)
    }

    fn degree_hint(&self) -> usize {
        self.degree()
    }
}

/// Random function with poles only in `poles`: for a point of maximal
/// order `m` the order is uniform in `1..=m` and every coefficient is
/// uniform in the square `[−1, 1]²`. A random constant is always added.
pub fn random_rational<R: Rng>(rng: &mut R, poles: &[(ExtPoint, usize)]) -> RationalFunction {
    let draw = |rng: &mut R| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let mut terms = Vec::new();
    let mut poly = vec![draw(rng)];
    for &(p, m) in poles {
        if m == 0 {
            continue;
        }
        let k = rng.random_range(1..=m);
        match p {
            ExtPoint::Finite(a) => terms.push(PoleTerm { at: a, coeffs: (0..k).map(|_| draw(rng)).collect() }),
            ExtPoint::Infinity => poly.extend((0..k).map(|_| draw(rng))),
        }
    }
    RationalFunction::new(terms, poly).expect("distinct pole locations")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PoleSide {
    Inside,
    Outside,
}

fn classify_point(curve: &AnalyticCurve, z: C64) -> Result<PoleSide> {
    let (dist, _) = curve.distance_to(z);
    if dist < POLE_FLOOR {
        return Err(Error::PoleOnCurve { pole: fmt_c(z), dist });
    }
    Ok(if curve.encloses(z) { PoleSide::Inside } else { PoleSide::Outside })
}

/// Points of the extended plane with multiplicities.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PoleSet {
    pub points: Vec<(ExtPoint, usize)>,
}

/// A pole set split by a curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifiedPoles {
    pub inner: Vec<(C64, usize)>,
    pub outer: Vec<(ExtPoint, usize)>,
    /// `dist(Z, Γ)`.
    pub delta0: f64,
}

impl PoleSet {
    pub fn new(points: Vec<(ExtPoint, usize)>) -> Self {
        Self { points: points.into_iter().filter(|p| p.1 > 0).collect() }
    }

    pub fn total(&self) -> usize {
        self.points.iter().map(|p| p.1).sum()
    }

    pub fn classify(&self, curve: &AnalyticCurve) -> Result<ClassifiedPoles> {
        let mut inner = Vec::new();
        let mut outer = Vec::new();
        let mut delta0 = f64::INFINITY;
        for &(p, m) in &self.points {
            match p {
                ExtPoint::Infinity => outer.push((p, m)),
                ExtPoint::Finite(z) => {
                    delta0 = delta0.min(curve.distance_to(z).0);
                    match classify_point(curve, z)? {
                        PoleSide::Inside => inner.push((z, m)),
                        PoleSide::Outside => outer.push((p, m)),
                    }
                }
            }
        }
        Ok(ClassifiedPoles { inner, outer, delta0 })
    }
}
