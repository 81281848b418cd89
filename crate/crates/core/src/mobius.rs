//! Points of the extended plane and fractional-linear maps acting on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtPoint {
    Finite(C64),
    Infinity,
}

impl ExtPoint {
    pub fn finite(self) -> Option<C64> {
        match self {
            ExtPoint::Finite(z) => Some(z),
            ExtPoint::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtPoint::Infinity)
    }

    /// Chordal-free "modulus": `+inf` for the point at infinity.
    pub fn norm(self) -> f64 {
        match self {
            ExtPoint::Finite(z) => z.norm(),
            ExtPoint::Infinity => f64::INFINITY,
        }
    }
}

impl From<C64> for ExtPoint {
    fn from(z: C64) -> Self {
        ExtPoint::Finite(z)
    }
}

impl std::fmt::Display for ExtPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtPoint::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            ExtPoint::Infinity => write!(f, "∞"),
        }
    }
}

/// `z ↦ (a z + b) / (c z + d)` with `ad − bc ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mobius {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let det = a * d - b * c;
        if det.norm() < 1e-300 || !det.is_finite() {
            return Err(Error::InvalidInput("degenerate Möbius map (ad − bc = 0)".into()));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self { a: one, b: zero, c: zero, d: one }
    }

    /// Affine map `z ↦ a z + b`.
    pub fn affine(a: C64, b: C64) -> Result<Self> {
        Self::new(a, b, C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    /// The unique map sending `z1, z2, z3` to `w1, w2, w3` (all finite, distinct).
    pub fn from_three_points(z: [C64; 3], w: [C64; 3]) -> Result<Self> {
        // Cross-ratio maps to (0, ∞, 1) composed.
        let to_std = |p: [C64; 3]| -> Result<Mobius> {
            // z ↦ (z − p0)(p2 − p1) / ((z − p1)(p2 − p0))
            let k = p[2] - p[1];
            let m = p[2] - p[0];
            Mobius::new(k, -p[0] * k, m, -p[1] * m)
        };
        let s = to_std(z)?;
        let t = to_std(w)?;
        Ok(t.inverse().compose(&s))
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Mobius) -> Self {
        Self {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn apply(&self, z: ExtPoint) -> ExtPoint {
        match z {
            ExtPoint::Infinity => {
                if self.c.norm() == 0.0 {
                    ExtPoint::Infinity
                } else {
                    ExtPoint::Finite(self.a / self.c)
                }
            }
            ExtPoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den.norm() == 0.0 {
                    ExtPoint::Infinity
                } else {
                    ExtPoint::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Evaluation at a finite point whose image is finite.
    pub fn eval(&self, z: C64) -> C64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    pub fn derivative(&self, z: C64) -> C64 {
        let den = self.c * z + self.d;
        self.det() / (den * den)
    }

    /// The point sent to ∞.
    pub fn pole(&self) -> ExtPoint {
        self.inverse().apply(ExtPoint::Infinity)
    }
}
