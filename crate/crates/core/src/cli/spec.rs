//! JSON run-spec schema.

use serde::Deserialize;

use crate::curves::{AnalyticCurve, ArcOpenUp};
use crate::error::Error;
use crate::extremal::PickPolicy;
use crate::mobius::ExtPoint;
use crate::ratfun::{blaschke_product, PoleTerm, RationalFunction};
use crate::C64;

/// Seed used when the run-spec gives none.
pub const DEFAULT_SEED: u64 = 20_240_521;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Bound,
    Verify,
    Sharpness,
    Map,
    Greens,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bound => "bound",
            Command::Verify => "verify",
            Command::Sharpness => "sharpness",
            Command::Map => "map",
            Command::Greens => "greens",
        }
    }
}

/// A schema violation with the offending field path.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for SpecError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "spec error at `{}`: {}", self.path, self.message)
    }
}

fn spec_err(path: &str, message: impl Into<String>) -> SpecError {
    SpecError { path: path.into(), message: message.into() }
}

/// `[re, im]` or a real number.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum CNum {
    Pair([f64; 2]),
    Real(f64),
}

impl CNum {
    pub fn value(self) -> C64 {
        match self {
            CNum::Pair([re, im]) => C64::new(re, im),
            CNum::Real(re) => C64::new(re, 0.0),
        }
    }
}

/// A complex number or `"inf"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ExtNum {
    Num(CNum),
    Word(String),
}

impl ExtNum {
    fn value(&self, path: &str) -> Result<ExtPoint, SpecError> {
        match self {
            ExtNum::Num(c) => Ok(ExtPoint::Finite(c.value())),
            ExtNum::Word(w) if w == "inf" => Ok(ExtPoint::Infinity),
            ExtNum::Word(w) => Err(spec_err(path, format!("expected a number, [re, im] or \"inf\", got {w:?}"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    Circle {
        center: Option<CNum>,
        radius: Option<f64>,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// `[[k, re, im], …]`
    Trig {
        coeffs: Vec<(i32, f64, f64)>,
    },
    Arc {
        openup: OpenUpSpec,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OpenUpSpec {
    Segment { from: Option<CNum>, to: Option<CNum> },
    Circular { center: CNum, radius: f64, theta1: f64, theta2: f64 },
}

/// Either a closed curve or an arc with its open-up.
pub enum Boundary {
    Curve(AnalyticCurve),
    Arc(ArcOpenUp),
}

impl CurveSpec {
    pub fn build(&self) -> Result<Boundary, Error> {
        Ok(match self {
            CurveSpec::Circle { center, radius } => Boundary::Curve(AnalyticCurve::circle(
                center.map(CNum::value).unwrap_or_default(),
                radius.unwrap_or(1.0),
            )?),
            CurveSpec::Ellipse { a, b } => Boundary::Curve(AnalyticCurve::ellipse(*a, *b)?),
            CurveSpec::Trig { coeffs } => {
                let c: Vec<(i32, C64)> = coeffs.iter().map(|&(k, re, im)| (k, C64::new(re, im))).collect();
                Boundary::Curve(AnalyticCurve::trig(&c)?)
            }
            CurveSpec::Arc { openup } => Boundary::Arc(match openup {
                OpenUpSpec::Segment { from: None, to: None } => ArcOpenUp::segment(),
                OpenUpSpec::Segment { from, to } => ArcOpenUp::segment_between(
                    from.map(CNum::value).unwrap_or(C64::new(-1.0, 0.0)),
                    to.map(CNum::value).unwrap_or(C64::new(1.0, 0.0)),
                )?,
                OpenUpSpec::Circular { center, radius, theta1, theta2 } => {
                    ArcOpenUp::circular_arc(center.value(), *radius, *theta1, *theta2)?
                }
            }),
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleSpec {
    pub at: ExtNum,
    #[serde(default = "one")]
    pub mult: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub at: CNum,
    /// Coefficients of `(u − at)^{−1}, (u − at)^{−2}, …`.
    pub coeffs: Vec<CNum>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    PartialFractions {
        #[serde(default)]
        terms: Vec<TermSpec>,
        #[serde(default)]
        poly: Vec<CNum>,
    },
    Blaschke {
        points: Vec<ExtNum>,
    },
    Chebyshev {
        degree: usize,
    },
    /// Random functions with poles in `poles` (orders up to the multiplicities).
    Corpus {
        count: usize,
    },
}

impl FunctionSpec {
    pub fn build(&self) -> Result<Option<RationalFunction>, SpecError> {
        let numeric = |e: Error| spec_err("function", e.to_string());
        Ok(Some(match self {
            FunctionSpec::PartialFractions { terms, poly } => {
                let terms = terms
                    .iter()
                    .map(|t| PoleTerm { at: t.at.value(), coeffs: t.coeffs.iter().map(|c| c.value()).collect() })
                    .collect();
                RationalFunction::new(terms, poly.iter().map(|c| c.value()).collect()).map_err(numeric)?
            }
            FunctionSpec::Blaschke { points } => {
                let pts = points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| p.value(&format!("function.points[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                blaschke_product(&pts).map_err(numeric)?
            }
            FunctionSpec::Chebyshev { degree } => RationalFunction::polynomial(chebyshev(*degree)).map_err(numeric)?,
            FunctionSpec::Corpus { .. } => return Ok(None),
        }))
    }
}

/// Monomial coefficients of `T_n`.
pub fn chebyshev(n: usize) -> Vec<C64> {
    let mut prev = vec![1.0];
    let mut cur = vec![0.0, 1.0];
    if n == 0 {
        return vec![C64::new(1.0, 0.0)];
    }
    for _ in 1..n {
        let mut next = vec![0.0; cur.len() + 1];
        for (k, c) in cur.iter().enumerate() {
            next[k + 1] += 2.0 * c;
        }
        for (k, c) in prev.iter().enumerate() {
            next[k] -= c;
        }
        prev = cur;
        cur = next;
    }
    cur.into_iter().map(|c| C64::new(c, 0.0)).collect()
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    /// Curve parameter.
    pub t: Option<f64>,
    /// Arc coordinate in `(−1, 1)`.
    pub x: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub tol_map: Option<f64>,
    pub tol_q: Option<f64>,
    pub sup_samples: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub n: Vec<usize>,
    pub z1: Vec<CNum>,
    pub zeta0: ExtNum,
    #[serde(default = "default_policy")]
    pub policy: PickPolicy,
}

fn default_policy() -> PickPolicy {
    PickPolicy::RepeatSinglePole
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub command: Option<Command>,
    pub curve: Option<CurveSpec>,
    pub poles: Option<Vec<PoleSpec>>,
    pub function: Option<FunctionSpec>,
    pub point: Option<PointSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub sweep: Option<SweepSpec>,
    /// Evaluation points for `greens`.
    pub probes: Option<Vec<CNum>>,
    pub output: Option<String>,
}

impl RunSpec {
    /// Parses JSON, reporting the path of the first offending field.
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize::<_, RunSpec>(de).map_err(|e| {
            let mut path = e.path().to_string();
            let message = e.inner().to_string();
            if let Some(field) = message.strip_prefix("missing field `").and_then(|m| m.split('`').next()) {
                path = if path == "." { field.to_string() } else { format!("{path}.{field}") };
            }
            SpecError { path, message }
        })
    }

    /// Checks command-specific requirements.
    pub fn validate(&self, command: Command) -> Result<(), SpecError> {
        if let Some(c) = self.command {
            if c != command {
                return Err(spec_err("command", format!("spec is for `{}`, invoked as `{}`", c.name(), command.name())));
            }
        }
        if self.curve.is_none() {
            return Err(spec_err("curve", "missing field `curve`"));
        }
        let is_arc = matches!(self.curve, Some(CurveSpec::Arc { .. }));
        for (name, v) in [("tolerances.tol_map", self.tolerances.tol_map), ("tolerances.tol_q", self.tolerances.tol_q)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(spec_err(name, "tolerance must be positive"));
                }
            }
        }
        if self.tolerances.sup_samples == Some(0) {
            return Err(spec_err("tolerances.sup_samples", "must be positive"));
        }
        if self.threads == Some(0) {
            return Err(spec_err("threads", "must be positive"));
        }
        if let Some(p) = self.point {
            if p.t.is_some() && p.x.is_some() {
                return Err(spec_err("point", "give either `t` or `x`, not both"));
            }
            if is_arc && p.t.is_some() {
                return Err(spec_err("point.t", "arcs take an arc coordinate `x`"));
            }
            if !is_arc && p.x.is_some() {
                return Err(spec_err("point.x", "closed curves take a parameter `t`"));
            }
        }
        if is_arc && matches!(command, Command::Bound | Command::Verify | Command::Greens) {
            match self.point.and_then(|p| p.x) {
                Some(x) if x > -1.0 && x < 1.0 => {}
                Some(_) => return Err(spec_err("point.x", "arc coordinate must lie in (−1, 1)")),
                None => return Err(spec_err("point.x", "missing arc coordinate")),
            }
        }
        match command {
            Command::Bound | Command::Greens => {
                if self.poles.as_ref().is_none_or(|p| p.is_empty()) {
                    return Err(spec_err("poles", "missing field `poles`"));
                }
                if command == Command::Greens && self.probes.is_none() {
                    return Err(spec_err("probes", "missing field `probes`"));
                }
            }
            Command::Verify => match &self.function {
                None => return Err(spec_err("function", "missing field `function`")),
                Some(FunctionSpec::Corpus { .. }) if self.poles.as_ref().is_none_or(|p| p.is_empty()) => {
                    return Err(spec_err("poles", "a corpus needs the pole set `poles`"));
                }
                _ => {}
            },
            Command::Sharpness => {
                if is_arc {
                    return Err(spec_err("curve", "the sharpness construction needs a closed curve"));
                }
                match &self.sweep {
                    None => return Err(spec_err("sweep", "missing field `sweep`")),
                    Some(s) if s.z1.is_empty() => return Err(spec_err("sweep.z1", "needs at least one interior pole")),
                    Some(s) if s.n.contains(&0) => return Err(spec_err("sweep.n", "degrees must be positive")),
                    _ => {}
                }
            }
            Command::Map => {
                if is_arc {
                    return Err(spec_err("curve", "maps are computed for closed curves"));
                }
            }
        }
        Ok(())
    }

    pub fn pole_points(&self) -> Result<Vec<(ExtPoint, usize)>, SpecError> {
        self.poles
            .iter()
            .flatten()
            .enumerate()
            .map(|(i, p)| Ok((p.at.value(&format!("poles[{i}].at"))?, p.mult)))
            .collect()
    }

    pub fn zeta0(&self) -> Result<ExtPoint, SpecError> {
        self.sweep.as_ref().map(|s| s.zeta0.value("sweep.zeta0")).unwrap_or(Ok(ExtPoint::Infinity))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_five() {
        let t5: Vec<f64> = chebyshev(5).iter().map(|c| c.re).collect();
        assert_eq!(t5, vec![0.0, 5.0, 0.0, -20.0, 0.0, 16.0]);
    }

    #[test]
    fn missing_curve_path() {
        let spec = RunSpec::parse(r#"{"poles":[{"at":0,"mult":5}]}"#).unwrap();
        assert_eq!(spec.validate(Command::Bound).unwrap_err().path, "curve");
    }

    #[test]
    fn nested_type_error_path() {
        let e = RunSpec::parse(r#"{"curve":{"kind":"circle"},"tolerances":{"tol_map":"x"}}"#).unwrap_err();
        assert_eq!(e.path, "tolerances.tol_map");
        let e = RunSpec::parse(r#"{"curve":{"kind":"circle"},"poles":[{"mult":2}]}"#).unwrap_err();
        assert_eq!(e.path, "poles[0].at");
    }

    #[test]
    fn pole_words() {
        let spec = RunSpec::parse(r#"{"curve":{"kind":"circle"},"poles":[{"at":"inf","mult":2},{"at":[0.5,0]}]}"#).unwrap();
        let p = spec.pole_points().unwrap();
        assert_eq!(p[0], (ExtPoint::Infinity, 2));
        assert_eq!(p[1], (ExtPoint::Finite(C64::new(0.5, 0.0)), 1));
        let spec = RunSpec::parse(r#"{"curve":{"kind":"circle"},"poles":[{"at":"nan"}]}"#).unwrap();
        assert_eq!(spec.pole_points().unwrap_err().path, "poles[0].at");
    }
}
