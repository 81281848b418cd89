//! Finite Blaschke products `Π B(a_j, v)`, `B(a, v) = (1 − ā v)/(v − a)`,
//! with `B(∞, v) = v`.

use serde::{Deserialize, Serialize};

use super::{ComplexFn, PoleTerm, RationalFunction, POLE_FLOOR};
use crate::error::{fmt_c, Error, Result};
use crate::mobius::ExtPoint;
use crate::C64;

/// Distance from the unit circle below which a point is rejected.
const CIRCLE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeProduct {
    /// Distinct points with multiplicities, in first-seen order.
    points: Vec<(ExtPoint, usize)>,
    interior: bool,
}

impl BlaschkeProduct {
    pub fn new(points: &[ExtPoint]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("Blaschke product needs at least one point".into()));
        }
        let mut inside = 0;
        for p in points {
            if let ExtPoint::Finite(a) = p {
                if !a.is_finite() {
                    return Err(Error::InvalidInput("non-finite Blaschke point".into()));
                }
                if (a.norm() - 1.0).abs() < CIRCLE_FLOOR {
                    return Err(Error::OnUnitCircle { point: fmt_c(*a) });
                }
                if a.norm() < 1.0 {
                    inside += 1;
                }
            }
        }
        if inside != 0 && inside != points.len() {
            return Err(Error::MixedSides);
        }
        let mut grouped: Vec<(ExtPoint, usize)> = Vec::new();
        for &p in points {
            match grouped.iter_mut().find(|g| g.0 == p) {
                Some(g) => g.1 += 1,
                None => grouped.push((p, 1)),
            }
        }
        Ok(Self { points: grouped, interior: inside > 0 })
    }

    pub fn points(&self) -> &[(ExtPoint, usize)] {
        &self.points
    }

    pub fn is_interior(&self) -> bool {
        self.interior
    }

    pub fn degree(&self) -> usize {
        self.points.iter().map(|p| p.1).sum()
    }

    fn guard(&self, v: C64) -> Result<()> {
        for &(p, _) in &self.points {
            if let ExtPoint::Finite(a) = p {
                let d = (v - a).norm();
                if d < POLE_FLOOR {
                    return Err(Error::NearPole { at: fmt_c(v), dist: d });
                }
            }
        }
        Ok(())
    }

    /// Product-form evaluation.
    pub fn eval(&self, v: C64) -> Result<C64> {
        self.guard(v)?;
        let mut acc = C64::new(1.0, 0.0);
        for &(p, m) in &self.points {
            acc *= factor(p, v).powu(m as u32);
        }
        Ok(acc)
    }

    /// Product rule over the factors.
    pub fn derivative(&self, v: C64) -> Result<C64> {
        self.guard(v)?;
        let vals: Vec<(C64, C64)> = self.points.iter().map(|&(p, _)| (factor(p, v), factor_derivative(p, v))).collect();
        let mut total = C64::new(0.0, 0.0);
        for (j, &(_, mj)) in self.points.iter().enumerate() {
            let mut term = vals[j].1 * mj as f64 * vals[j].0.powu(mj as u32 - 1);
            for (i, &(_, mi)) in self.points.iter().enumerate() {
                if i != j {
                    term *= vals[i].0.powu(mi as u32);
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Partial-fraction form, from local Laurent series of the product at
    /// each pole and at ∞.
    pub fn to_rational(&self) -> RationalFunction {
        let mut terms = Vec::new();
        for &(p, m) in &self.points {
            let ExtPoint::Finite(a) = p else { continue };
            let mut series = vec![C64::new(0.0, 0.0); m];
            series[0] = C64::new(1.0, 0.0);
            for &(q, k) in &self.points {
                let local = if q == p {
                    // (1 − ā v)^m with v = a + x
                    vec![C64::new(1.0 - a.norm_sqr(), 0.0), -a.conj()]
                } else {
                    factor_series_at(q, a, m)
                };
                let exponent = if q == p { m } else { k };
                for _ in 0..exponent {
                    series = mul_truncated(&series, &local, m);
                }
            }
            let coeffs = (0..m).map(|k| series[m - 1 - k]).collect();
            terms.push(PoleTerm { at: a, coeffs });
        }
        let m_inf: usize = self.points.iter().filter(|p| p.0.is_infinite()).map(|p| p.1).sum();
        let mut series = vec![C64::new(0.0, 0.0); m_inf + 1];
        series[0] = C64::new(1.0, 0.0);
        for &(q, k) in &self.points {
            let ExtPoint::Finite(b) = q else { continue };
            // (w − b̄)/(1 − b w) in powers of w = 1/v
            let mut local = vec![C64::new(0.0, 0.0); m_inf + 1];
            let mut bk = C64::new(1.0, 0.0);
            for j in 0..=m_inf {
                local[j] -= b.conj() * bk;
                if j + 1 <= m_inf {
                    local[j + 1] += bk;
                }
                bk *= b;
            }
            for _ in 0..k {
                series = mul_truncated(&series, &local, m_inf + 1);
            }
        }
        let poly = (0..=m_inf).map(|j| series[m_inf - j]).collect();
        RationalFunction::new(terms, poly).expect("Blaschke partial fractions are well formed")
    }
}

fn factor(p: ExtPoint, v: C64) -> C64 {
    match p {
        ExtPoint::Infinity => v,
        ExtPoint::Finite(a) => (1.0 - a.conj() * v) / (v - a),
    }
}

fn factor_derivative(p: ExtPoint, v: C64) -> C64 {
    match p {
        ExtPoint::Infinity => C64::new(1.0, 0.0),
        ExtPoint::Finite(a) => {
            let d = v - a;
            C64::new(a.norm_sqr() - 1.0, 0.0) / (d * d)
        }
    }
}

/// Taylor series of `B(q, a + x)` in `x`, `len` terms.
fn factor_series_at(q: ExtPoint, a: C64, len: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); len];
    match q {
        ExtPoint::Infinity => {
            out[0] = a;
            if len > 1 {
                out[1] = C64::new(1.0, 0.0);
            }
        }
        ExtPoint::Finite(b) => {
            // ((1 − b̄a) − b̄x) / (d + x), d = a − b
            let d = a - b;
            let num0 = 1.0 - b.conj() * a;
            let num1 = -b.conj();
            let mut geo = d.inv();
            let ratio = -d.inv();
            let mut prev = C64::new(0.0, 0.0);
            for slot in out.iter_mut() {
                *slot = num0 * geo + num1 * prev;
                prev = geo;
                geo *= ratio;
            }
        }
    }
    out
}

fn mul_truncated(a: &[C64], b: &[C64], len: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.norm() == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

impl ComplexFn for BlaschkeProduct {
    fn value(&self, u: C64) -> Result<C64> {
        self.eval(u)
    }

    fn degree_hint(&self) -> usize {
        self.degree()
    }
}

/// `Π B(a_j, ·)` in partial-fraction form.
pub fn blaschke_product(points: &[ExtPoint]) -> Result<RationalFunction> {
    Ok(BlaschkeProduct::new(points)?.to_rational())
}
