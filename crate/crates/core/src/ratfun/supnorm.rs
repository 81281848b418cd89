//! Boundary sup norms by dense sampling plus Brent refinement of the
//! sampled local maxima.

use std::f64::consts::TAU;

use serde::Serialize;

use super::ComplexFn;
use crate::curves::AnalyticCurve;
use crate::error::Result;
use crate::C64;

#[derive(Debug, Clone, Copy)]
pub struct SupOptions {
    pub min_samples: usize,
    pub per_degree: usize,
    /// Forces the sample count when set.
    pub samples: Option<usize>,
    /// Local maxima within this fraction of the sampled max are refined.
    pub refine_fraction: f64,
    /// At most this many of the largest local maxima are refined.
    pub max_refine: usize,
}

impl Default for SupOptions {
    fn default() -> Self {
        Self { min_samples: 4096, per_degree: 64, samples: None, refine_fraction: 0.9, max_refine: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupNorm {
    pub value: f64,
    /// Parameter of the maximizer.
    pub t: f64,
    pub point: C64,
    pub samples: usize,
}

/// `‖f‖_Γ` over a closed curve.
pub fn sup_norm(f: &dyn ComplexFn, curve: &AnalyticCurve, opts: &SupOptions) -> Result<SupNorm> {
    sup_norm_on(f, &|t| curve.eval(t), opts)
}

/// Sup of `|f(path(t))|` over a `2π`-periodic path.
pub fn sup_norm_on(f: &dyn ComplexFn, path: &dyn Fn(f64) -> C64, opts: &SupOptions) -> Result<SupNorm> {
    let m = opts.samples.unwrap_or_else(|| opts.min_samples.max(opts.per_degree * f.degree_hint()));
    let h = TAU / m as f64;
    let vals: Vec<f64> = (0..m).map(|j| f.value(path(j as f64 * h)).map(|z| z.norm())).collect::<Result<_>>()?;
    let top = vals.iter().cloned().fold(0.0, f64::max);
    let mut best = SupNorm { value: -1.0, t: 0.0, point: path(0.0), samples: m };
    let mut peaks: Vec<usize> = (0..m)
        .filter(|&j| {
            vals[j] >= vals[(j + m - 1) % m] && vals[j] >= vals[(j + 1) % m] && vals[j] >= opts.refine_fraction * top
        })
        .collect();
    peaks.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    peaks.truncate(opts.max_refine);
    for j in peaks {
        let objective = |t: f64| -> Result<f64> { Ok(-f.value(path(t))?.norm()) };
        let t0 = j as f64 * h;
        let (t, val) = brent_min(&objective, t0 - h, t0, t0 + h, -vals[j])?;
        let val = -val;
        if val > best.value {
            best = SupNorm { value: val, t: t.rem_euclid(TAU), point: path(t), samples: m };
        }
    }
    if best.value < 0.0 {
        // Constant modulus: every sample is a plateau.
        let j = vals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|p| p.0).unwrap_or(0);
        best = SupNorm { value: vals[j], t: j as f64 * h, point: path(j as f64 * h), samples: m };
    }
    Ok(best)
}

/// Brent's minimizer on `[a, b]` with interior start `x` (`f(x) = fx`).
fn brent_min(f: &dyn Fn(f64) -> Result<f64>, mut a: f64, x0: f64, mut b: f64, fx0: f64) -> Result<(f64, f64)> {
    const GOLD: f64 = 0.381_966_011_250_105_1;
    let (mut x, mut w, mut v) = (x0, x0, x0);
    let (mut fx, mut fw, mut fv) = (fx0, fx0, fx0);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (a + b);
        let tol1 = 1e-12 * x.abs() + 1e-14;
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if mid >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= mid { a - x } else { b - x };
            d = GOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u)?;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Ok((x, fx))
}
