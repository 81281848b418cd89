//! Asymptotically extremal rational functions.
//!
//! A Blaschke product `hₙ` with interior poles is transplanted to the
//! curve through `Φ₁`, split into its principal parts `f₁,ₙ` and an analytic
//! remainder `φ_e`, and the remainder is replaced by a polynomial in
//! `w = ψ(u) = 1/(u − ζ₀)` that Hermite-interpolates `φ_e` at Leja points of
//! `ψ(Γ)` and doubly at `ψ(u₀)`.

mod hermite;
mod leja;

pub use hermite::NewtonPoly;
pub use leja::{leja_points, LejaSet};

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::{MapPair, Side};
use crate::curves::{polygon_winding, AnalyticCurve};
use crate::error::{fmt_c, Error, Result};
use crate::mobius::ExtPoint;
use crate::potential::{bernstein_bound, disk_normal_derivative, BoundReport};
use crate::ratfun::{
    laurent_principal, sup_norm, BlaschkeProduct, ComplexFn, ContourSample, PoleSet, PoleTerm, QuadratureOptions,
    RationalFunction, SupOptions,
};
use crate::C64;

/// `⌊n^{4/5}⌋`.
pub fn n6(n: usize) -> usize {
    let x = (n as f64).powf(0.8);
    // Guard against x = k − ε for exact powers.
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.floor() as usize
    }
}

/// Blaschke product with one-sided poles and its equality residual
/// `||h'(1)| − ‖h‖·bound|`.
pub fn build_circle_extremal(points: &[ExtPoint]) -> Result<(RationalFunction, f64)> {
    let b = BlaschkeProduct::new(points)?;
    let h = b.to_rational();
    let side = if b.is_interior() { Side::Interior } else { Side::Exterior };
    let mut bound = 0.0;
    for &(p, m) in b.points() {
        bound += m as f64 * disk_normal_derivative(p, side)?;
    }
    let norm = sup_norm(&b, &AnalyticCurve::unit_circle(), &SupOptions::default())?.value;
    let d = b.derivative(C64::new(1.0, 0.0))?.norm();
    Ok((h, (d - norm * bound).abs()))
}

/// `w = 1/(u − ζ₀)`, or `w = u` when `ζ₀ = ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Psi {
    pub zeta0: ExtPoint,
}

impl Psi {
    pub fn eval(&self, u: C64) -> C64 {
        match self.zeta0 {
            ExtPoint::Finite(z) => (u - z).inv(),
            ExtPoint::Infinity => u,
        }
    }

    pub fn derivative(&self, u: C64) -> C64 {
        match self.zeta0 {
            ExtPoint::Finite(z) => {
                let d = u - z;
                -(d * d).inv()
            }
            ExtPoint::Infinity => C64::new(1.0, 0.0),
        }
    }

    pub fn inverse(&self, w: C64) -> C64 {
        match self.zeta0 {
            ExtPoint::Finite(z) => z + w.inv(),
            ExtPoint::Infinity => w,
        }
    }
}

/// `fₙ = f₁,ₙ + f₂,w ∘ ψ`, kept in structured form for evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransplantedFunction {
    pub f1: RationalFunction,
    pub psi: Psi,
    pub f2: NewtonPoly,
}

impl TransplantedFunction {
    pub fn eval(&self, u: C64) -> Result<C64> {
        self.guard(u)?;
        Ok(self.f1.eval(u)? + self.f2.eval(self.psi.eval(u)))
    }

    pub fn derivative(&self, u: C64) -> Result<C64> {
        self.guard(u)?;
        let (_, dp) = self.f2.eval_with_derivative(self.psi.eval(u));
        Ok(self.f1.derivative(u)? + dp * self.psi.derivative(u))
    }

    fn guard(&self, u: C64) -> Result<()> {
        if let ExtPoint::Finite(z) = self.psi.zeta0 {
            let d = (u - z).norm();
            if d < crate::ratfun::POLE_FLOOR {
                return Err(Error::NearPole { at: fmt_c(u), dist: d });
            }
        }
        Ok(())
    }

    /// Partial-fraction form (monomial conversion of `f₂,w`).
    pub fn flatten(&self) -> Result<RationalFunction> {
        let m = self.f2.monomial();
        let f2 = match self.psi.zeta0 {
            ExtPoint::Infinity => RationalFunction::polynomial(m)?,
            ExtPoint::Finite(z) => {
                let constant = m.first().copied().unwrap_or_default();
                let coeffs = m.get(1..).map(|c| c.to_vec()).unwrap_or_default();
                RationalFunction::new(vec![PoleTerm { at: z, coeffs }], vec![constant])?
            }
        };
        Ok(self.f1.add(&f2))
    }
}

impl ComplexFn for TransplantedFunction {
    fn value(&self, u: C64) -> Result<C64> {
        self.eval(u)
    }

    fn degree_hint(&self) -> usize {
        self.f1.degree() + self.f2.degree()
    }
}

/// How the `n` poles are drawn from `Z₁`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PickPolicy {
    RepeatSinglePole,
    CycleList,
}

#[derive(Debug, Clone, Copy)]
pub struct ExtremalOptions {
    pub quadrature: QuadratureOptions,
    pub sup: SupOptions,
    /// Samples of `Γ_w` offered to the Leja selection.
    pub leja_samples: usize,
    /// Pseudo-hyperbolic radius of the principal-part contours.
    pub contour_radius: f64,
    /// Samples used for `‖φ_e − f₂,w∘ψ‖_Γ`.
    pub error_samples: usize,
}

impl Default for ExtremalOptions {
    fn default() -> Self {
        Self {
            quadrature: QuadratureOptions::default(),
            sup: SupOptions::default(),
            leja_samples: 4096,
            contour_radius: 0.9,
            error_samples: 512,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremalRun {
    pub n: usize,
    pub n6: usize,
    /// Disk preimages `αⱼ` of the picks.
    pub picks: Vec<C64>,
    /// Interior poles `Φ₁(αⱼ)` with orders.
    pub poles: Vec<(C64, usize)>,
    pub zeta0: ExtPoint,
    pub zeta0_order: usize,
    pub delta1_prime: f64,
    /// Interpolation nodes in the `w` plane: `w₀, w₀`, then the Leja points.
    pub nodes: Vec<C64>,
    pub leja: LejaSet,
    pub function: TransplantedFunction,
    pub flattened: RationalFunction,
    /// `|hₙ'(1)|`.
    pub h_derivative: f64,
    pub deriv_mod: f64,
    pub sup_norm: f64,
    pub report: BoundReport,
    pub ratio: f64,
    /// Largest Hermite-condition defect at the nodes.
    pub hermite_residual: f64,
    /// `‖φ_e − f₂,w∘ψ‖_Γ` on sampled boundary points.
    pub approx_error: f64,
}

/// Picks `u`-plane points from `Z₁` under `policy`.
pub fn pick_points(z1: &[C64], n: usize, policy: PickPolicy) -> Result<Vec<C64>> {
    if z1.is_empty() {
        return Err(Error::InvalidInput("construction needs at least one interior pole".into()));
    }
    Ok(match policy {
        PickPolicy::RepeatSinglePole => vec![z1[0]; n],
        PickPolicy::CycleList => (0..n).map(|j| z1[j % z1.len()]).collect(),
    })
}

fn group(points: &[C64]) -> Vec<(C64, usize)> {
    let mut out: Vec<(C64, usize)> = Vec::new();
    for &p in points {
        match out.iter_mut().find(|g| g.0 == p) {
            Some(g) => g.1 += 1,
            None => out.push((p, 1)),
        }
    }
    out
}

fn pseudo_hyperbolic(a: C64, b: C64) -> f64 {
    ((a - b) / (1.0 - a.conj() * b)).norm()
}

/// Samples of `Φ₁(|v| = r)`.
fn level_curve(maps: &MapPair, r: f64, m: usize) -> Result<Vec<C64>> {
    (0..m).map(|j| maps.interior.eval(C64::from_polar(r, TAU * (j as f64 + 0.5) / m as f64))).collect()
}

/// Runs the transplant construction for `n` picks (`u`-plane points of
/// `Z₁`) and the exterior anchor `zeta0`.
pub fn build_transferred_extremal(
    maps: &MapPair,
    picks_u: &[C64],
    zeta0: ExtPoint,
    other_exterior: &[ExtPoint],
    opts: &ExtremalOptions,
) -> Result<ExtremalRun> {
    let n = picks_u.len();
    if n == 0 {
        return Err(Error::InvalidInput("construction needs at least one interior pick".into()));
    }
    let curve = &maps.curve;
    if let ExtPoint::Finite(z) = zeta0 {
        if curve.encloses(z) || curve.distance_to(z).0 < crate::ratfun::POLE_FLOOR {
            return Err(Error::InvalidInput(format!("ζ₀ = {} must lie outside the curve", fmt_c(z))));
        }
    }
    let n6 = n6(n);
    let u0 = maps.anchor.point;

    // (1) hₙ over the disk preimages.
    let grouped_u = group(picks_u);
    let mut grouped_v = Vec::with_capacity(grouped_u.len());
    for &(z, m) in &grouped_u {
        if !curve.encloses(z) {
            return Err(Error::InvalidInput(format!("pick {} is not inside the curve", fmt_c(z))));
        }
        grouped_v.push((maps.interior.invert(z)?, m));
    }
    let mut all_v = Vec::with_capacity(n);
    for &(a, m) in &grouped_v {
        all_v.extend(std::iter::repeat_n(ExtPoint::Finite(a), m));
    }
    let h = BlaschkeProduct::new(&all_v)?;
    let one = C64::new(1.0, 0.0);
    let h_derivative_c = h.derivative(one)?;

    // (2) principal parts of hₙ∘Φ₁⁻¹ on images of pseudo-hyperbolic circles.
    let mut terms = Vec::with_capacity(grouped_v.len());
    let mut poles = Vec::with_capacity(grouped_v.len());
    for (i, &(a, m)) in grouped_v.iter().enumerate() {
        let mut r = opts.contour_radius;
        for (j, &(b, _)) in grouped_v.iter().enumerate() {
            if i != j {
                r = r.min(0.5 * pseudo_hyperbolic(a, b));
            }
        }
        let den = 1.0 - r * r * a.norm_sqr();
        let center = a * (1.0 - r * r) / den;
        let radius = r * (1.0 - a.norm_sqr()) / den;
        let big_a = maps.interior.eval(a)?;
        let coeffs = laurent_principal(
            big_a,
            m,
            |th| {
                let e = C64::from_polar(1.0, th);
                let v = center + radius * e;
                Ok(ContourSample {
                    u: maps.interior.eval(v)?,
                    du: maps.interior.derivative(v)? * C64::new(0.0, radius) * e,
                    g: h.eval(v)?,
                })
            },
            &opts.quadrature,
        )?;
        terms.push(PoleTerm { at: big_a, coeffs });
        poles.push((big_a, m));
    }
    let f1 = RationalFunction::new(terms, Vec::new())?;

    // (3) φ_e = hₙ∘Φ₁⁻¹ − f₁,ₙ.
    let phi_e = |u: C64| -> Result<C64> { Ok(h.eval(maps.interior.invert(u)?)? - f1.eval(u)?) };
    let phi_e_derivative = h_derivative_c / maps.interior.derivative_at_anchor - f1.derivative(u0)?;

    // (4) ψ, Γ_w, w₀.
    let psi = Psi { zeta0 };
    let w0 = psi.eval(u0);
    let m = opts.leja_samples;
    let gamma_w: Vec<C64> = (0..m).map(|j| psi.eval(curve.eval(TAU * (j as f64 + 0.5) / m as f64))).collect();

    // (5) Γ_{w+} must keep ψ(Z₂) outside; shrink δ₁′ once.
    let mut delta1_prime = maps.delta1 / 2.0;
    let mut attempts = 0;
    loop {
        let plus = level_curve(maps, 1.0 + delta1_prime, 1024)?;
        let hit = other_exterior.iter().any(|&b| match b {
            ExtPoint::Finite(z) if b != zeta0 => polygon_winding(&plus, z).abs() > 0.5,
            _ => false,
        });
        if !hit {
            break;
        }
        attempts += 1;
        if attempts > 1 {
            return Err(Error::InvalidInput("Γ_w+ cannot avoid the exterior poles".into()));
        }
        delta1_prime /= 2.0;
    }

    // (6) Leja points of Γ_w, seeded away from w₀.
    let seed = *gamma_w
        .iter()
        .max_by(|a, b| (*a - w0).norm().total_cmp(&(*b - w0).norm()))
        .expect("Γ_w samples exist");
    let leja = leja_points(&gamma_w, n6, seed);

    // (7) Hermite interpolant on [w₀, w₀, Leja…].
    let mut nodes = vec![w0, w0];
    nodes.extend_from_slice(&leja.nodes);
    let values: Vec<C64> = nodes.iter().map(|&w| phi_e(psi.inverse(w))).collect::<Result<_>>()?;
    let target_derivative = phi_e_derivative / psi.derivative(u0);
    let f2 = NewtonPoly::hermite(&nodes, &values, target_derivative);
    let mut hermite_residual: f64 = (f2.eval_with_derivative(w0).1 - target_derivative).norm();
    for (w, y) in nodes.iter().zip(&values) {
        hermite_residual = hermite_residual.max((f2.eval(*w) - y).norm());
    }

    // (8) fₙ and its diagnostics.
    let function = TransplantedFunction { f1: f1.clone(), psi, f2 };
    let flattened = function.flatten()?;
    let zeta0_order = n6 + 1;
    let deriv_mod = function.derivative(u0)?.norm();
    let sup = sup_norm(&function, curve, &opts.sup)?.value;
    let mut pole_set: Vec<(ExtPoint, usize)> = poles.iter().map(|&(a, m)| (ExtPoint::Finite(a), m)).collect();
    pole_set.push((zeta0, zeta0_order));
    let report = bernstein_bound(&PoleSet::new(pole_set), maps)?;
    let ratio = deriv_mod / (sup * report.bound);

    let k = opts.error_samples;
    let mut approx_error: f64 = 0.0;
    for j in 0..k {
        let u = curve.eval(TAU * (j as f64 + 0.25) / k as f64);
        let e = phi_e(u)? - function.f2.eval(psi.eval(u));
        approx_error = approx_error.max(e.norm());
    }

    Ok(ExtremalRun {
        n,
        n6,
        picks: all_v.iter().filter_map(|p| p.finite()).collect(),
        poles,
        zeta0,
        zeta0_order,
        delta1_prime,
        nodes,
        leja,
        function,
        flattened,
        h_derivative: h_derivative_c.norm(),
        deriv_mod,
        sup_norm: sup,
        report,
        ratio,
        hermite_residual,
        approx_error,
    })
}

/// `min_{Γ_{w+}} |P| / max_{Γ_w} |P|` for the Leja polynomial of degree `n6`.
pub fn node_separation(maps: &MapPair, zeta0: ExtPoint, n6: usize, samples: usize) -> Result<f64> {
    let psi = Psi { zeta0 };
    let m = samples;
    let gamma_w: Vec<C64> =
        (0..m).map(|j| psi.eval(maps.curve.eval(TAU * (j as f64 + 0.5) / m as f64))).collect();
    let w0 = psi.eval(maps.anchor.point);
    let seed = *gamma_w
        .iter()
        .max_by(|a, b| (*a - w0).norm().total_cmp(&(*b - w0).norm()))
        .expect("Γ_w samples exist");
    let leja = leja_points(&gamma_w, n6, seed);
    let plus: Vec<C64> = level_curve(maps, 1.0 + maps.delta1 / 2.0, m)?.into_iter().map(|u| psi.eval(u)).collect();
    let inner_max = gamma_w.iter().map(|&w| leja.eval(w).norm()).fold(0.0, f64::max);
    let outer_min = plus.iter().map(|&w| leja.eval(w).norm()).fold(f64::INFINITY, f64::min);
    Ok(outer_min / inner_max)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub n6: usize,
    pub outcome: std::result::Result<SweepValues, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepValues {
    pub ratio: f64,
    pub bound: f64,
    pub sup_norm: f64,
    pub deriv_mod: f64,
    pub h_derivative: f64,
    pub hermite_residual: f64,
    pub approx_error: f64,
}

impl SweepRow {
    /// `ok` when every check passed; otherwise `;`-separated flag names.
    pub fn flags(&self, transfer_tol: f64) -> String {
        match &self.outcome {
            Err(e) => format!("error: {e}"),
            Ok(v) => {
                let mut flags = Vec::new();
                if (v.deriv_mod - v.h_derivative).abs() > transfer_tol * v.h_derivative {
                    flags.push("derivative_transfer");
                }
                if v.hermite_residual > 1e-8 {
                    flags.push("hermite");
                }
                if flags.is_empty() {
                    "ok".into()
                } else {
                    flags.join(";")
                }
            }
        }
    }
}

/// One construction per `n`; failures are recorded per row.
pub fn sharpness_sweep(
    maps: &MapPair,
    z1: &[C64],
    zeta0: ExtPoint,
    other_exterior: &[ExtPoint],
    ns: &[usize],
    policy: PickPolicy,
    opts: &ExtremalOptions,
) -> Result<Vec<SweepRow>> {
    if z1.is_empty() {
        return Err(Error::InvalidInput("construction needs at least one interior pole".into()));
    }
    Ok(ns
        .par_iter()
        .map(|&n| {
            let outcome = pick_points(z1, n, policy)
                .and_then(|picks| build_transferred_extremal(maps, &picks, zeta0, other_exterior, opts))
                .map(|run| SweepValues {
                    ratio: run.ratio,
                    bound: run.report.bound,
                    sup_norm: run.sup_norm,
                    deriv_mod: run.deriv_mod,
                    h_derivative: run.h_derivative,
                    hermite_residual: run.hermite_residual,
                    approx_error: run.approx_error,
                })
                .map_err(|e| e.to_string());
            SweepRow { n, n6: n6(n), outcome }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::MapOptions;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn n6_values() {
        assert_eq!(n6(1), 1);
        assert_eq!(n6(5), 3);
        assert_eq!(n6(10), 6);
        assert_eq!(n6(20), 10);
        assert_eq!(n6(32), 16);
        assert_eq!(n6(40), 19);
    }

    #[test]
    fn circle_equality_examples() {
        let (_, r) = build_circle_extremal(&vec![ExtPoint::Finite(c(0.0, 0.0)); 7]).unwrap();
        assert!(r < 1e-12);
        let (h, r) = build_circle_extremal(&[ExtPoint::Finite(c(0.5, 0.0)); 2]).unwrap();
        assert!(r < 1e-12);
        assert!((h.derivative(c(1.0, 0.0)).unwrap().norm() - 6.0).abs() < 1e-12);
        let (h, r) = build_circle_extremal(&[ExtPoint::Finite(c(2.0, 0.0))]).unwrap();
        assert!(r < 1e-12);
        assert!((h.derivative(c(1.0, 0.0)).unwrap().norm() - 3.0).abs() < 1e-12);
        assert!(matches!(
            build_circle_extremal(&[ExtPoint::Finite(c(0.5, 0.0)), ExtPoint::Finite(c(2.0, 0.0))]),
            Err(Error::MixedSides)
        ));
    }

    #[test]
    fn single_origin_pick_is_exact() {
        let maps = MapPair::solve(&AnalyticCurve::unit_circle(), 0.0, &MapOptions::default()).unwrap();
        let run = build_transferred_extremal(&maps, &[c(0.0, 0.0)], ExtPoint::Finite(c(-1.8, 0.0)), &[], &Default::default())
            .unwrap();
        assert!((run.ratio - 1.0).abs() < 1e-12, "{}", run.ratio);
        assert!(run.approx_error < 1e-12);
    }

    #[test]
    fn repeated_pick_on_circle_reproduces_blaschke() {
        let maps = MapPair::solve(&AnalyticCurve::unit_circle(), 0.0, &MapOptions::default()).unwrap();
        let picks = vec![c(0.5, 0.0); 10];
        let run =
            build_transferred_extremal(&maps, &picks, ExtPoint::Finite(c(3.0, 0.0)), &[], &Default::default()).unwrap();
        let h = BlaschkeProduct::new(&[ExtPoint::Finite(c(0.5, 0.0)); 10]).unwrap();
        let mut worst: f64 = 0.0;
        for j in 0..256 {
            let v = C64::from_polar(1.0, TAU * j as f64 / 256.0);
            worst = worst.max((run.function.eval(v).unwrap() - h.eval(v).unwrap()).norm());
        }
        assert!(worst < 1e-6, "{worst:e}");
        assert!(run.ratio > 0.999);
        assert!((run.deriv_mod - run.h_derivative).abs() < 1e-6 * run.h_derivative);
        assert_eq!(run.nodes.len(), run.n6 + 2);
        assert!(run.flattened.degree() <= n6(10) + 2 + 10);
    }

    #[test]
    fn empty_interior_set_is_rejected() {
        let maps = MapPair::solve(&AnalyticCurve::unit_circle(), 0.0, &MapOptions::default()).unwrap();
        let r = sharpness_sweep(&maps, &[], ExtPoint::Infinity, &[], &[5], PickPolicy::RepeatSinglePole, &Default::default());
        assert!(r.is_err());
    }
}
