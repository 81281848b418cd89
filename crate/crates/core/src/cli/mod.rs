//! Batch front end: run-specs in, deterministic CSV reports out.
//!
//! ```text
//! bern <command> --config SPEC.json [--out DIR] [--cache DIR]
//! ```
//!
//! Exit codes: 0 on success, 2 for spec errors (with the field path), 3 for
//! numerical failures. `BERN_THREADS` overrides the run-spec's `threads`.

mod spec;

pub use spec::{chebyshev, Boundary, CNum, Command, CurveSpec, FunctionSpec, RunSpec, SpecError, DEFAULT_SEED};

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::conformal::{MapOptions, MapPair, Side};
use crate::curves::{AnalyticCurve, ArcOpenUp};
use crate::error::Error;
use crate::extremal::{sharpness_sweep, ExtremalOptions};
use crate::mobius::ExtPoint;
use crate::potential::{
    arc_bound, bernstein_bound, domain_normal_derivative, fmt_num, green_disk, green_domain,
    verify_ratio, BoundReport, Target,
};
use crate::ratfun::{random_rational, PoleSet, QuadratureOptions, RationalFunction, SupOptions};
use crate::C64;

#[derive(Debug)]
pub enum CliError {
    Spec(SpecError),
    Numerical(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Spec(e) => write!(f, "{e}"),
            CliError::Numerical(e) => write!(f, "numerical error: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        CliError::Spec(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numerical(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    RatioVsN,
    Contributions,
}

impl PlotKind {
    pub fn file_name(self) -> &'static str {
        match self {
            PlotKind::RatioVsN => "ratio_vs_n.dat",
            PlotKind::Contributions => "contributions.dat",
        }
    }

    fn columns(self) -> &'static str {
        match self {
            PlotKind::RatioVsN => "n r_n",
            PlotKind::Contributions => "pole_index contribution",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub spec_sha256: String,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_s: f64,
}

/// Everything one run writes.
#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub command: Command,
    pub summary: String,
    pub items: String,
    pub plot: Option<(PlotKind, Vec<(f64, f64)>)>,
    pub provenance: Provenance,
}

/// Two-column text with `#` header lines; `kind` must match the bundle.
pub fn emit_plot_data(bundle: &ReportBundle, kind: PlotKind) -> Result<String, CliError> {
    let rows = match &bundle.plot {
        Some((k, rows)) if *k == kind => rows,
        _ => {
            return Err(CliError::Spec(SpecError {
                path: "command".into(),
                message: format!("no {kind:?} plot data for command `{}`", bundle.command.name()),
            }))
        }
    };
    let mut out = format!("# {}\n# spec_sha256 {}\n# {}\n", kind.file_name(), bundle.provenance.spec_sha256, kind.columns());
    for (x, y) in rows {
        let _ = writeln!(out, "{} {}", fmt_num(*x), fmt_num(*y));
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub cache: Option<PathBuf>,
    /// Thread count from the environment; overrides the run-spec.
    pub threads: Option<usize>,
}

pub fn spec_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses, validates and executes one run-spec.
pub fn run(command: Command, text: &str, opts: &RunOptions) -> Result<ReportBundle, CliError> {
    let started = Instant::now();
    let spec = RunSpec::parse(text)?;
    spec.validate(command)?;
    let threads = opts.threads.or(spec.threads).unwrap_or(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let seed = spec.seed.unwrap_or(DEFAULT_SEED);
    let (summary, items, plot) = pool.install(|| execute(command, &spec, seed, opts))?;
    Ok(ReportBundle {
        command,
        summary,
        items,
        plot,
        provenance: Provenance {
            tool: "bern".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.name().into(),
            spec_sha256: spec_hash(text),
            seed,
            threads,
            wall_time_s: started.elapsed().as_secs_f64(),
        },
    })
}

type Output = (String, String, Option<(PlotKind, Vec<(f64, f64)>)>);

fn map_options(spec: &RunSpec) -> MapOptions {
    MapOptions { tol_map: spec.tolerances.tol_map.unwrap_or(1e-10), ..MapOptions::default() }
}

fn sup_options(spec: &RunSpec) -> SupOptions {
    SupOptions { samples: spec.tolerances.sup_samples, ..SupOptions::default() }
}

fn boundary(spec: &RunSpec) -> Result<Boundary, CliError> {
    Ok(spec.curve.as_ref().expect("validated").build()?)
}

/// Solves (or loads from the cache) the map pair of `curve` at `t`.
pub fn solve_maps(curve: &AnalyticCurve, t: f64, mopts: &MapOptions, cache: Option<&Path>) -> Result<MapPair, CliError> {
    let key = spec_hash(&format!(
        "{}|{:016x}|{:016x}|{}",
        curve.fingerprint(),
        t.to_bits(),
        mopts.tol_map.to_bits(),
        mopts.force_numerical
    ));
    let path = cache.map(|dir| dir.join(format!("map-{key}.json")));
    if let Some(p) = &path {
        if let Ok(text) = std::fs::read_to_string(p) {
            if let Ok(pair) = serde_json::from_str::<MapPair>(&text) {
                return Ok(pair);
            }
        }
    }
    let pair = MapPair::solve(curve, t, mopts)?;
    if let (Some(p), Some(dir)) = (&path, cache) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(e.to_string()))?;
        let text = serde_json::to_string(&pair).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(p, text).map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(pair)
}

fn ext_cols(p: ExtPoint) -> (String, String) {
    match p {
        ExtPoint::Finite(z) => (fmt_num(z.re), fmt_num(z.im)),
        ExtPoint::Infinity => ("inf".into(), "inf".into()),
    }
}

fn execute(command: Command, spec: &RunSpec, seed: u64, opts: &RunOptions) -> Result<Output, CliError> {
    let point = spec.point.unwrap_or_default();
    let t = point.t.unwrap_or(0.0);
    match (command, boundary(spec)?) {
        (Command::Bound, b) => {
            let poles = PoleSet::new(spec.pole_points()?);
            let report = match b {
                Boundary::Curve(curve) => {
                    let maps = solve_maps(&curve, t, &map_options(spec), opts.cache.as_deref())?;
                    bernstein_bound(&poles, &maps)?
                }
                Boundary::Arc(arc) => arc_bound(arc.arc_point(point.x.expect("validated")), &poles, &arc)?,
            };
            Ok(bound_output(&report))
        }
        (Command::Verify, b) => verify(spec, b, t, point.x, seed, opts),
        (Command::Sharpness, Boundary::Curve(curve)) => sharpness(spec, &curve, t, opts),
        (Command::Map, Boundary::Curve(curve)) => {
            let maps = solve_maps(&curve, t, &map_options(spec), opts.cache.as_deref())?;
            map_output(&maps)
        }
        (Command::Greens, b) => greens(spec, b, t, point.x, opts),
        _ => unreachable!("arc commands rejected by validation"),
    }
}

fn bound_output(report: &BoundReport) -> Output {
    let summary = format!(
        "point_re,point_im,inner_sum,outer_sum,bound\n{},{},{},{},{}\n",
        fmt_num(report.point.re),
        fmt_num(report.point.im),
        fmt_num(report.inner),
        fmt_num(report.outer),
        fmt_num(report.bound)
    );
    let mut items = String::from("pole_index,pole_re,pole_im,side,contribution\n");
    let mut plot = Vec::with_capacity(report.contributions.len());
    for (i, c) in report.contributions.iter().enumerate() {
        let (re, im) = ext_cols(c.pole);
        let side = match c.side {
            crate::potential::SumSide::Inner => "inner",
            crate::potential::SumSide::Outer => "outer",
        };
        let _ = writeln!(items, "{i},{re},{im},{side},{}", fmt_num(c.value));
        plot.push((i as f64, c.value));
    }
    (summary, items, Some((PlotKind::Contributions, plot)))
}

fn verify(spec: &RunSpec, b: Boundary, t: f64, x: Option<f64>, seed: u64, opts: &RunOptions) -> Result<Output, CliError> {
    let fspec = spec.function.as_ref().expect("validated");
    let functions: Vec<RationalFunction> = match fspec.build()? {
        Some(f) => vec![f],
        None => {
            let FunctionSpec::Corpus { count } = fspec else { unreachable!() };
            let poles = spec.pole_points()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..*count).map(|_| random_rational(&mut rng, &poles)).collect()
        }
    };
    let sup = sup_options(spec);
    let maps;
    let arc: ArcOpenUp;
    let target = match b {
        Boundary::Curve(curve) => {
            maps = solve_maps(&curve, t, &map_options(spec), opts.cache.as_deref())?;
            Target::Curve(&maps)
        }
        Boundary::Arc(a) => {
            arc = a;
            Target::Arc(&arc, x.expect("validated"))
        }
    };
    let records: Vec<_> = functions.par_iter().map(|f| verify_ratio(f, &target, &sup)).collect();
    let mut items = String::from("index,degree,deriv_mod,sup_norm,bound,ratio,rough_ratio\n");
    let mut max_ratio = f64::NEG_INFINITY;
    let mut max_rough = f64::NEG_INFINITY;
    for (i, r) in records.into_iter().enumerate() {
        let r = r?;
        max_ratio = max_ratio.max(r.ratio);
        max_rough = max_rough.max(r.rough_ratio);
        let _ = writeln!(
            items,
            "{i},{},{},{},{},{},{}",
            r.degree,
            fmt_num(r.deriv_mod),
            fmt_num(r.sup_norm),
            fmt_num(r.bound),
            fmt_num(r.ratio),
            fmt_num(r.rough_ratio)
        );
    }
    let summary = format!(
        "count,max_ratio,max_rough_ratio\n{},{},{}\n",
        functions.len(),
        fmt_num(max_ratio),
        fmt_num(max_rough)
    );
    Ok((summary, items, None))
}

fn sharpness(spec: &RunSpec, curve: &AnalyticCurve, t: f64, opts: &RunOptions) -> Result<Output, CliError> {
    let sweep = spec.sweep.as_ref().expect("validated");
    let maps = solve_maps(curve, t, &map_options(spec), opts.cache.as_deref())?;
    let z1: Vec<C64> = sweep.z1.iter().map(|c| c.value()).collect();
    let zeta0 = spec.zeta0()?;
    let others: Vec<ExtPoint> = spec.pole_points()?.into_iter().map(|p| p.0).collect();
    let eopts = ExtremalOptions {
        quadrature: QuadratureOptions { tol: spec.tolerances.tol_q.unwrap_or(1e-12), ..QuadratureOptions::default() },
        sup: sup_options(spec),
        ..ExtremalOptions::default()
    };
    let rows = sharpness_sweep(&maps, &z1, zeta0, &others, &sweep.n, sweep.policy, &eopts)?;
    let mut items = String::from("n,N6,r_n,bound,sup_norm,deriv_mod,residual_flags\n");
    let mut plot = Vec::new();
    let mut ok = 0;
    for row in &rows {
        let flags = row.flags(1e-4);
        match &row.outcome {
            Ok(v) => {
                ok += 1;
                plot.push((row.n as f64, v.ratio));
                let _ = writeln!(
                    items,
                    "{},{},{},{},{},{},{}",
                    row.n,
                    row.n6,
                    fmt_num(v.ratio),
                    fmt_num(v.bound),
                    fmt_num(v.sup_norm),
                    fmt_num(v.deriv_mod),
                    flags
                );
            }
            Err(_) => {
                let _ = writeln!(items, "{},{},,,,,\"{}\"", row.n, row.n6, flags.replace('"', "'"));
            }
        }
    }
    let summary = format!("rows,succeeded,delta1\n{},{},{}\n", rows.len(), ok, fmt_num(maps.delta1));
    Ok((summary, items, Some((PlotKind::RatioVsN, plot))))
}

fn map_output(maps: &MapPair) -> Result<Output, CliError> {
    let mut summary =
        String::from("side,closed_form,anchor_residual,derivative_error,tail,margin,series_terms,iterations\n");
    let mut items = String::from("side,k,re,im\n");
    for (label, map) in [("interior", &maps.interior), ("exterior", &maps.exterior)] {
        let inv = map.check_invariants()?;
        let _ = writeln!(
            summary,
            "{label},{},{},{},{},{},{},{}",
            map.closed_form,
            fmt_num(inv.anchor_residual),
            fmt_num(inv.derivative_error),
            fmt_num(inv.tail),
            fmt_num(map.margin),
            map.series.len(),
            map.iterations
        );
        for (k, c) in map.series.iter().enumerate() {
            let _ = writeln!(items, "{label},{k},{},{}", fmt_num(c.re), fmt_num(c.im));
        }
    }
    let _ = writeln!(summary, "boundary_match,{}", fmt_num(maps.boundary_match(512)?));
    Ok((summary, items, None))
}

fn greens(spec: &RunSpec, b: Boundary, t: f64, x: Option<f64>, opts: &RunOptions) -> Result<Output, CliError> {
    let poles = spec.pole_points()?;
    let probes: Vec<C64> = spec.probes.iter().flatten().map(|c| c.value()).collect();
    let mut summary = String::from("pole_re,pole_im,side,normal_derivative\n");
    let mut items = String::from("probe_re,probe_im,pole_re,pole_im,green\n");
    match b {
        Boundary::Curve(curve) => {
            let maps = solve_maps(&curve, t, &map_options(spec), opts.cache.as_deref())?;
            let classified = PoleSet::new(poles.clone()).classify(&curve)?;
            let side_of = |p: ExtPoint| {
                if classified.inner.iter().any(|q| ExtPoint::Finite(q.0) == p) {
                    Side::Interior
                } else {
                    Side::Exterior
                }
            };
            for &(p, _) in &poles {
                let side = side_of(p);
                let (re, im) = ext_cols(p);
                let label = if side == Side::Interior { "inner" } else { "outer" };
                let _ = writeln!(summary, "{re},{im},{label},{}", fmt_num(domain_normal_derivative(p, side, &maps)?));
            }
            for &u in &probes {
                for &(p, _) in &poles {
                    let (re, im) = ext_cols(p);
                    let g = green_domain(u, p, side_of(p), &maps)?;
                    let _ = writeln!(items, "{},{},{re},{im},{}", fmt_num(u.re), fmt_num(u.im), fmt_num(g));
                }
            }
        }
        Boundary::Arc(arc) => {
            let z0 = arc.arc_point(x.expect("validated"));
            for &(p, _) in &poles {
                let (re, im) = ext_cols(p);
                for (side, label) in [(crate::potential::ArcSide::N1, "n1"), (crate::potential::ArcSide::N2, "n2")] {
                    let v = crate::potential::arc_normal_derivative(z0, side, p, &arc)?;
                    let _ = writeln!(summary, "{re},{im},{label},{}", fmt_num(v));
                }
            }
            for &z in &probes {
                let v = arc.branch_inverse(ExtPoint::Finite(z), true)?;
                for &(p, _) in &poles {
                    let (re, im) = ext_cols(p);
                    let b = arc.branch_inverse(p, true)?;
                    let g = match v {
                        ExtPoint::Finite(v) => green_disk(v, b, Side::Interior)?,
                        ExtPoint::Infinity => unreachable!("interior branch is finite"),
                    };
                    let _ = writeln!(items, "{},{},{re},{im},{}", fmt_num(z.re), fmt_num(z.im), fmt_num(g));
                }
            }
        }
    }
    Ok((summary, items, None))
}

/// Writes `summary.csv`, `items.csv`, `provenance.json` and any plot file.
pub fn write_bundle(bundle: &ReportBundle, dir: &Path) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join("summary.csv"), &bundle.summary).map_err(io)?;
    std::fs::write(dir.join("items.csv"), &bundle.items).map_err(io)?;
    let prov = serde_json::to_string_pretty(&bundle.provenance).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(dir.join("provenance.json"), prov + "\n").map_err(io)?;
    if let Some((kind, _)) = &bundle.plot {
        std::fs::write(dir.join(kind.file_name()), emit_plot_data(bundle, *kind)?).map_err(io)?;
    }
    Ok(())
}

/// Output directory: `--out`, else the run-spec's `output`, else `bern-out`.
pub fn output_dir(text: &str, flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| RunSpec::parse(text).ok().and_then(|s| s.output).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("bern-out"))
}
