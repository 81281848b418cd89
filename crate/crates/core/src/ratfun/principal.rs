//! Principal parts by trapezoidal contour quadrature,
//! `c₋ₖ(a) = (1/2πi) ∮ g(u) (u − a)^{k−1} du`.

use std::f64::consts::TAU;

use super::{ComplexFn, PoleTerm, RationalFunction};
use crate::curves::AnalyticCurve;
use crate::error::{fmt_c, Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub start_nodes: usize,
    pub max_nodes: usize,
    /// Allowed `Q` vs `2Q` change, relative to the contour scale of each moment.
    pub tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { start_nodes: 64, max_nodes: 4096, tol: 1e-12 }
    }
}

/// One contour node: point `u(θ)`, `du/dθ` and `g(u(θ))`.
#[derive(Debug, Clone, Copy)]
pub struct ContourSample {
    pub u: C64,
    pub du: C64,
    pub g: C64,
}

fn moments(center: C64, order: usize, samples: &[ContourSample]) -> (Vec<C64>, Vec<f64>) {
    let q = samples.len() as f64;
    let mut coeffs = vec![C64::new(0.0, 0.0); order];
    let mut scale = vec![0.0; order];
    for s in samples {
        let x = s.u - center;
        let mut w = s.g * s.du;
        for k in 0..order {
            coeffs[k] += w;
            scale[k] += w.norm();
            w *= x;
        }
    }
    // (1/2πi) · (2π/Q) Σ = Σ / (iQ)
    let f = C64::new(0.0, -1.0 / q);
    (coeffs.into_iter().map(|c| c * f).collect(), scale.into_iter().map(|s| s / q).collect())
}

/// Principal coefficients `[c₋₁, …, c₋ₘ]` at `center` from a closed contour
/// `θ ↦ ContourSample` on `[0, 2π)` winding once around `center` and no
/// other singularity. Nodes are doubled until two successive rules agree.
pub fn laurent_principal<F>(center: C64, order: usize, contour: F, opts: &QuadratureOptions) -> Result<Vec<C64>>
where
    F: Fn(f64) -> Result<ContourSample>,
{
    let sample = |q: usize| -> Result<Vec<ContourSample>> { (0..q).map(|j| contour(TAU * j as f64 / q as f64)).collect() };
    let mut q = opts.start_nodes.max(8);
    let mut prev = moments(center, order, &sample(q)?).0;
    let mut mismatch = f64::INFINITY;
    while 2 * q <= opts.max_nodes.max(16) {
        q *= 2;
        let (next, scale) = moments(center, order, &sample(q)?);
        mismatch = next
            .iter()
            .zip(&prev)
            .zip(&scale)
            .map(|((a, b), s)| (a - b).norm() / s.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        prev = next;
        if mismatch <= opts.tol {
            return Ok(prev);
        }
    }
    Err(Error::QuadratureMismatch { pole: fmt_c(center), mismatch })
}

/// Sum of the principal parts of `g` at `poles`, on circles of radius
/// `min(dist(a, Γ), distance to the other poles)/2`.
pub fn principal_parts(
    g: &dyn ComplexFn,
    poles: &[(C64, usize)],
    curve: Option<&AnalyticCurve>,
    opts: &QuadratureOptions,
) -> Result<RationalFunction> {
    let mut terms = Vec::with_capacity(poles.len());
    for (i, &(a, m)) in poles.iter().enumerate() {
        let mut reach = f64::INFINITY;
        if let Some(curve) = curve {
            reach = reach.min(curve.distance_to(a).0);
        }
        for (j, &(b, _)) in poles.iter().enumerate() {
            if i != j {
                reach = reach.min((a - b).norm());
            }
        }
        if !reach.is_finite() {
            reach = 1.0;
        }
        let rho = reach / 2.0;
        if !(rho > 1e-8 * (1.0 + a.norm())) {
            return Err(Error::QuadratureRadius { pole: fmt_c(a), reason: format!("radius {rho:.3e} too small") });
        }
        let coeffs = laurent_principal(
            a,
            m,
            |th| {
                let e = C64::from_polar(1.0, th);
                let u = a + rho * e;
                Ok(ContourSample { u, du: C64::new(0.0, rho) * e, g: g.value(u)? })
            },
            opts,
        )?;
        terms.push(PoleTerm { at: a, coeffs });
    }
    RationalFunction::new(terms, Vec::new())
}
