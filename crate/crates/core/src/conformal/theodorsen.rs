//! Theodorsen's boundary-correspondence iteration for the interior Riemann
//! map of a curve that is starlike about a given centre.
//!
//! With `Φ(v) = c + v·exp(L(v))`, the boundary values of `L` are
//! `log ρ(θ(φ)) + i(θ(φ) − φ)`, so the polar angle of the boundary
//! correspondence satisfies `θ = φ + K[log ρ(θ)]`, `K` being the periodic
//! conjugation operator. The fixed point is found by relaxed iteration on a
//! uniform `φ` grid, with `K` applied through the FFT.

use std::f64::consts::TAU;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::curves::ClosedCurve;
use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy)]
pub(crate) struct TheodorsenOptions {
    pub min_grid: usize,
    pub max_grid: usize,
    pub relaxation: f64,
    pub max_iterations: usize,
    /// Fixed-point tolerance on the polar angles.
    pub tol: f64,
    /// Relative size allowed for the unresolved Fourier tail.
    pub tail_tol: f64,
}

impl Default for TheodorsenOptions {
    fn default() -> Self {
        Self {
            min_grid: 256,
            max_grid: 16384,
            relaxation: 0.9,
            max_iterations: 2000,
            tol: 1e-14,
            tail_tol: 1e-13,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct TheodorsenSolution {
    /// Curve parameter `t_j` attached to `φ_j = 2πj/M`.
    pub params: Vec<f64>,
    /// FFT coefficients of the boundary values, index `k` = frequency `k mod M`.
    pub spectrum: Vec<C64>,
    pub iterations: usize,
    pub residual: f64,
    /// Largest unresolved coefficient relative to the leading one.
    pub tail: f64,
}

/// Polar-angle parametrisation of a starlike curve about `center`.
struct PolarTable<'a, C: ClosedCurve> {
    curve: &'a C,
    center: C64,
    ts: Vec<f64>,
    thetas: Vec<f64>,
}

impl<'a, C: ClosedCurve> PolarTable<'a, C> {
    fn new(curve: &'a C, center: C64) -> Result<Self> {
        let k = 4096;
        let mut ts = Vec::with_capacity(k + 1);
        let mut thetas = Vec::with_capacity(k + 1);
        let mut prev = curve.point(0.0) - center;
        let mut theta = prev.arg();
        for j in 0..=k {
            let t = TAU * j as f64 / k as f64;
            let z = curve.point(t) - center;
            if j > 0 {
                theta += (z / prev).arg();
            }
            let rate = (curve.tangent(t) / z).im;
            if rate <= 0.0 || !rate.is_finite() {
                return Err(Error::NotConverged {
                    what: "Theodorsen iteration (curve is not starlike about the centre)".into(),
                    residual: f64::INFINITY,
                });
            }
            ts.push(t);
            thetas.push(theta);
            prev = z;
        }
        if (thetas[k] - thetas[0] - TAU).abs() > 1e-6 {
            return Err(Error::NotConverged {
                what: "Theodorsen iteration (centre not enclosed once)".into(),
                residual: f64::INFINITY,
            });
        }
        Ok(Self { curve, center, ts, thetas })
    }

    fn angle_in_cell(&self, j: usize, t: f64) -> f64 {
        let base = self.curve.point(self.ts[j]) - self.center;
        self.thetas[j] + ((self.curve.point(t) - self.center) / base).arg()
    }

    /// Curve parameter whose polar angle is `theta` (any real, periodic).
    fn param_of(&self, theta: f64) -> f64 {
        let th0 = self.thetas[0];
        let wraps = ((theta - th0) / TAU).floor();
        let target = theta - wraps * TAU;
        let j = match self.thetas.binary_search_by(|x| x.total_cmp(&target)) {
            Ok(j) => return self.ts[j] + wraps * TAU,
            Err(j) => j.saturating_sub(1).min(self.ts.len() - 2),
        };
        let (mut lo, mut hi) = (self.ts[j], self.ts[j + 1]);
        let mut t = lo + (hi - lo) * (target - self.thetas[j]) / (self.thetas[j + 1] - self.thetas[j]);
        for _ in 0..60 {
            let f = self.angle_in_cell(j, t) - target;
            if f.abs() < 1e-15 {
                break;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let z = self.curve.point(t) - self.center;
            let rate = (self.curve.tangent(t) / z).im;
            let mut next = t - f / rate;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() < 1e-16 {
                t = next;
                break;
            }
            t = next;
        }
        t + wraps * TAU
    }
}

struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Spectral {
    fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { forward: planner.plan_fft_forward(m), inverse: planner.plan_fft_inverse(m) }
    }

    /// Coefficients `X_k / M` of samples on the uniform grid.
    fn analyse(&self, values: &[C64]) -> Vec<C64> {
        let m = values.len();
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        buf.iter().map(|x| x / m as f64).collect()
    }

    /// Periodic conjugate function (mean-free) of real samples.
    fn conjugate(&self, values: &[f64]) -> Vec<f64> {
        let m = values.len();
        let mut buf: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        let half = m / 2;
        buf[0] = C64::new(0.0, 0.0);
        buf[half] = C64::new(0.0, 0.0);
        for (k, x) in buf.iter_mut().enumerate() {
            if k > 0 && k < half {
                *x *= C64::new(0.0, -1.0);
            } else if k > half {
                *x *= C64::new(0.0, 1.0);
            }
        }
        self.inverse.process(&mut buf);
        buf.iter().map(|x| x.re / m as f64).collect()
    }
}

fn solve_on_grid<C: ClosedCurve>(
    table: &PolarTable<'_, C>,
    m: usize,
    opts: &TheodorsenOptions,
) -> Result<(Vec<f64>, usize, f64)> {
    let spectral = Spectral::new(m);
    let phis: Vec<f64> = (0..m).map(|j| TAU * j as f64 / m as f64).collect();
    let mut thetas = phis.clone();
    let mut residual = f64::INFINITY;
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    for it in 1..=opts.max_iterations {
        let log_rho: Vec<f64> = thetas
            .iter()
            .map(|&th| (table.curve.point(table.param_of(th)) - table.center).norm().ln())
            .collect();
        let conj = spectral.conjugate(&log_rho);
        residual = 0.0;
        for j in 0..m {
            let delta = phis[j] + conj[j] - thetas[j];
            residual = f64::max(residual, delta.abs());
            thetas[j] += opts.relaxation * delta;
        }
        if !residual.is_finite() {
            break;
        }
        if residual < opts.tol {
            let params = thetas.iter().map(|&th| table.param_of(th)).collect();
            return Ok((params, it, residual));
        }
        if residual < best * 0.999 {
            best = residual;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled > 50 {
                // Round-off floor: accept if close to the tolerance.
                if best < opts.tol * 100.0 {
                    let params = thetas.iter().map(|&th| table.param_of(th)).collect();
                    return Ok((params, it, residual));
                }
                break;
            }
        }
    }
    Err(Error::NotConverged { what: "Theodorsen iteration".into(), residual })
}

/// Interior Riemann map `Φ: 𝔻 → Int C` with `Φ(0) = center`, `Φ'(0) > 0`.
pub(crate) fn solve_interior<C: ClosedCurve>(
    curve: &C,
    center: C64,
    opts: &TheodorsenOptions,
) -> Result<TheodorsenSolution> {
    let table = PolarTable::new(curve, center)?;
    let mut m = opts.min_grid.next_power_of_two();
    loop {
        let (params, iterations, residual) = solve_on_grid(&table, m, opts)?;
        let values: Vec<C64> = params.iter().map(|&t| curve.point(t)).collect();
        let spectrum = Spectral::new(m).analyse(&values);
        let lead = spectrum[1].norm().max(1e-300);
        let tail = spectrum[(3 * m / 8)..]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
            / lead;
        if tail < opts.tail_tol || m >= opts.max_grid {
            return Ok(TheodorsenSolution { params, spectrum, iterations, residual, tail });
        }
        m *= 2;
    }
}

/// The curve `t ↦ 1/(C(−t) − center)`, positively oriented when `C` is.
pub(crate) struct Inverted<'a, C: ClosedCurve> {
    pub curve: &'a C,
    pub center: C64,
}

impl<C: ClosedCurve> ClosedCurve for Inverted<'_, C> {
    fn point(&self, t: f64) -> C64 {
        (self.curve.point(-t) - self.center).inv()
    }
    fn tangent(&self, t: f64) -> C64 {
        let d = self.curve.point(-t) - self.center;
        self.curve.tangent(-t) / (d * d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::AnalyticCurve;

    #[test]
    fn circle_about_centre_is_affine() {
        let c = AnalyticCurve::circle(C64::new(0.5, -0.25), 2.0).unwrap();
        let sol = solve_interior(&c, C64::new(0.5, -0.25), &TheodorsenOptions::default()).unwrap();
        assert!((sol.spectrum[0] - C64::new(0.5, -0.25)).norm() < 1e-13);
        assert!((sol.spectrum[1] - C64::new(2.0, 0.0)).norm() < 1e-13);
        assert!(sol.tail < 1e-13);
    }

    #[test]
    fn off_centre_circle_matches_mobius_map() {
        // Unit circle, centre 0.3: Φ(v) = (v + 0.3)/(1 + 0.3v), Taylor
        // coefficients a_0 = 0.3, a_k = (1 − 0.09)(−0.3)^{k−1}.
        let c = AnalyticCurve::unit_circle();
        let sol = solve_interior(&c, C64::new(0.3, 0.0), &TheodorsenOptions::default()).unwrap();
        assert!((sol.spectrum[0] - C64::new(0.3, 0.0)).norm() < 1e-12);
        for k in 1..20 {
            let exact = 0.91 * (-0.3f64).powi(k as i32 - 1);
            assert!((sol.spectrum[k] - C64::new(exact, 0.0)).norm() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn non_starlike_curve_is_rejected() {
        // A strongly indented curve: starlike fails about its centroid.
        let c = AnalyticCurve::trig(&[(1, C64::new(1.0, 0.0)), (-4, C64::new(0.3, 0.0))]).unwrap();
        let r = solve_interior(&c, C64::new(0.0, 0.0), &TheodorsenOptions::default());
        assert!(matches!(r, Err(Error::NotConverged { .. })));
    }
}
