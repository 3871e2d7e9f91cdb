// SPDX-License-Identifier: Apache-2.0
//! Experiment driver behind the command-line tool: JSON configs in, CSV tables
//! and JSON summaries out.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::contour::{solve_integral, ContourOptions};
use crate::dispersion::validate_problem;
use crate::error::{Error, Result};
use crate::fd::{assemble_system, integrate_until, Stepper, StepperKind};
use crate::fit::loglog_slope;
use crate::oracles::ExactSolution;
use crate::problem::{
    make_grid, BoundaryCondition, EquationKind, ExpPolyTerm, ProblemSpec, SolutionField, StencilKind, TimeFunction,
};
use crate::registry::{interior_for_spacing, lookup, NamedProblem};
use crate::series::{solve_series, SeriesOptions};
use crate::transforms::DEFAULT_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    SdutmSeries,
    SdutmIntegral,
    Fe,
    Rk4,
    Be,
    Tr,
    Oracle,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::SdutmSeries => "sdutm-series",
            SolverKind::SdutmIntegral => "sdutm-integral",
            SolverKind::Fe => "fe",
            SolverKind::Rk4 => "rk4",
            SolverKind::Be => "be",
            SolverKind::Tr => "tr",
            SolverKind::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_string()))
            .map_err(|_| Error::InvalidArgument(format!("unknown solver '{s}'")))
    }

    pub fn stepper(&self) -> Option<StepperKind> {
        match self {
            SolverKind::Fe => Some(StepperKind::Fe),
            SolverKind::Rk4 => Some(StepperKind::Rk4),
            SolverKind::Be => Some(StepperKind::Be),
            SolverKind::Tr => Some(StepperKind::Tr),
            _ => None,
        }
    }
}

/// A real number or an [re, im] pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Number> for C64 {
    fn from(n: Number) -> C64 {
        match n {
            Number::Real(r) => C64::new(r, 0.0),
            Number::Complex([re, im]) => C64::new(re, im),
        }
    }
}

/// Initial data for an inline problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceData {
    /// Nodal values on every grid node, boundaries included.
    Values { values: Vec<Number> },
    /// sum_j c_j x^j
    Polynomial { coeffs: Vec<Number> },
    /// a sin(w x)
    Sine { amplitude: Number, frequency: f64 },
    /// a cos(w x)
    Cosine { amplitude: Number, frequency: f64 },
    /// a exp(-(x - x0)^2 / (2 s^2))
    Gaussian { amplitude: Number, center: f64, width: f64 },
    Sum { terms: Vec<SpaceData> },
}

impl SpaceData {
    fn eval(&self, x: f64) -> C64 {
        match self {
            SpaceData::Values { .. } => unreachable!("nodal values are not evaluated pointwise"),
            SpaceData::Polynomial { coeffs } => {
                coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * x + C64::from(*c))
            }
            SpaceData::Sine { amplitude, frequency } => C64::from(*amplitude) * (frequency * x).sin(),
            SpaceData::Cosine { amplitude, frequency } => C64::from(*amplitude) * (frequency * x).cos(),
            SpaceData::Gaussian { amplitude, center, width } => {
                C64::from(*amplitude) * (-(x - center).powi(2) / (2.0 * width * width)).exp()
            }
            SpaceData::Sum { terms } => terms.iter().map(|t| t.eval(x)).sum(),
        }
    }

    fn sample(&self, nodes: &[f64]) -> Result<Vec<C64>> {
        match self {
            SpaceData::Values { values } => {
                if values.len() != nodes.len() {
                    return Err(Error::InvalidArgument(format!(
                        "{} nodal values given for {} grid nodes",
                        values.len(),
                        nodes.len()
                    )));
                }
                Ok(values.iter().map(|&v| v.into()).collect())
            }
            SpaceData::Sum { terms } if terms.iter().any(|t| matches!(t, SpaceData::Values { .. })) => {
                let mut acc = vec![C64::new(0.0, 0.0); nodes.len()];
                for term in terms {
                    for (a, b) in acc.iter_mut().zip(term.sample(nodes)?) {
                        *a += b;
                    }
                }
                Ok(acc)
            }
            _ => Ok(nodes.iter().map(|&x| self.eval(x)).collect()),
        }
    }
}

/// Boundary data for an inline problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TimeData {
    Constant { value: Number },
    Polynomial { coeffs: Vec<Number> },
    /// a exp(r t)
    Exponential { amplitude: Number, rate: Number },
    Sine { amplitude: f64, frequency: f64 },
    Cosine { amplitude: f64, frequency: f64 },
    Sum { terms: Vec<TimeData> },
}

impl TimeData {
    fn build(&self) -> TimeFunction {
        match self {
            TimeData::Constant { value } => TimeFunction::constant(C64::from(*value)),
            TimeData::Polynomial { coeffs } => TimeFunction::polynomial(coeffs.iter().map(|&c| c.into()).collect()),
            TimeData::Exponential { amplitude, rate } => {
                TimeFunction::exponential(C64::from(*amplitude), C64::from(*rate))
            }
            TimeData::Sine { amplitude, frequency } => TimeFunction::sine(*amplitude, *frequency),
            TimeData::Cosine { amplitude, frequency } => TimeFunction::cosine(*amplitude, *frequency),
            TimeData::Sum { terms } => {
                let all: Vec<ExpPolyTerm> = terms
                    .iter()
                    .flat_map(|t| t.build().terms().map(|s| s.to_vec()).unwrap_or_default())
                    .collect();
                TimeFunction::exp_poly(all)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BoundaryData {
    Dirichlet { data: TimeData },
    Neumann { data: TimeData },
}

impl BoundaryData {
    fn build(&self) -> BoundaryCondition {
        match self {
            BoundaryData::Dirichlet { data } => BoundaryCondition::dirichlet(data.build()),
            BoundaryData::Neumann { data } => BoundaryCondition::neumann(data.build()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineProblem {
    pub equation: EquationKind,
    pub stencil: StencilKind,
    #[serde(default = "unit_length")]
    pub length: f64,
    pub initial: SpaceData,
    #[serde(default)]
    pub left: Option<BoundaryData>,
    #[serde(default)]
    pub right: Option<BoundaryData>,
}

fn unit_length() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemRef {
    Named(String),
    Inline(Box<InlineProblem>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn to_vec(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    /// Target max-norm error E.
    pub target: f64,
    pub t_values: Vec<f64>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Seconds after which a method is abandoned at a given T.
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
    #[serde(default = "default_methods")]
    pub methods: Vec<SolverKind>,
    #[serde(default = "default_n_start")]
    pub n_start: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

fn default_runs() -> usize {
    10
}
fn default_cutoff() -> f64 {
    1e3
}
fn default_methods() -> Vec<SolverKind> {
    vec![SolverKind::Fe, SolverKind::Rk4, SolverKind::Be, SolverKind::Tr]
}
fn default_n_start() -> usize {
    8
}
fn default_n_max() -> usize {
    20_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemRef,
    #[serde(default)]
    pub solver: Option<SolverKind>,
    /// Solvers compared by `converge`; defaults to `solver`.
    #[serde(default)]
    pub solvers: Vec<SolverKind>,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub h_values: Vec<f64>,
    #[serde(default)]
    pub t: Option<OneOrMany>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub summary: Option<PathBuf>,
    #[serde(default)]
    pub bench: Option<BenchConfig>,
}

impl RunConfig {
    pub fn named(problem: &str) -> Self {
        RunConfig {
            problem: ProblemRef::Named(problem.to_string()),
            solver: None,
            solvers: Vec::new(),
            h: None,
            n: None,
            h_values: Vec::new(),
            t: None,
            dt: None,
            tol: None,
            out: None,
            summary: None,
            bench: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))
    }

    fn tol(&self) -> Result<f64> {
        let tol = self.tol.unwrap_or(DEFAULT_TOL);
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        Ok(tol)
    }
}

/// A problem resolved from a config: a spec factory plus, for named problems, an oracle.
pub struct Resolved {
    pub name: String,
    pub named: Option<NamedProblem>,
    pub inline: Option<InlineProblem>,
    pub default_t: Option<f64>,
    pub default_h: Option<f64>,
    pub default_dt: Option<f64>,
}

impl Resolved {
    pub fn new(problem: &ProblemRef) -> Result<Self> {
        Ok(match problem {
            ProblemRef::Named(name) => {
                let p = lookup(name)?;
                Resolved {
                    name: name.clone(),
                    default_t: Some(p.default_t),
                    default_h: Some(p.default_h),
                    default_dt: Some(p.default_dt),
                    named: Some(p),
                    inline: None,
                }
            }
            ProblemRef::Inline(p) => Resolved {
                name: "inline".into(),
                named: None,
                inline: Some((**p).clone()),
                default_t: None,
                default_h: None,
                default_dt: None,
            },
        })
    }

    fn length(&self) -> f64 {
        match (&self.named, &self.inline) {
            (Some(p), _) => p.length,
            (_, Some(p)) => p.length,
            _ => unreachable!(),
        }
    }

    pub fn spec(&self, interior: usize) -> Result<ProblemSpec> {
        if let Some(p) = &self.named {
            return p.spec(interior);
        }
        let p = self.inline.as_ref().expect("inline problem");
        let grid = make_grid(p.length, interior)?;
        let initial = p.initial.sample(&grid.nodes())?;
        ProblemSpec::new(
            p.equation,
            p.stencil,
            grid,
            initial,
            p.left.as_ref().map(BoundaryData::build),
            p.right.as_ref().map(BoundaryData::build),
        )
    }

    pub fn spec_with_spacing(&self, h: f64) -> Result<ProblemSpec> {
        self.spec(interior_for_spacing(self.length(), h)?)
    }

    pub fn oracle(&self) -> Result<ExactSolution> {
        match &self.named {
            Some(p) => p.oracle(),
            None => Err(Error::UnsupportedOracle("inline problems have no exact solution".into())),
        }
    }
}

/// Solve `spec` to time T with the chosen method.
pub fn run_solver(
    spec: &ProblemSpec,
    solver: SolverKind,
    t: f64,
    dt: Option<f64>,
    tol: f64,
    oracle: Option<&ExactSolution>,
) -> Result<SolutionField> {
    match solver {
        SolverKind::SdutmSeries => solve_series(spec, t, SeriesOptions { tol, ..Default::default() }),
        SolverKind::SdutmIntegral => solve_integral(spec, t, &ContourOptions { tol, ..Default::default() }),
        SolverKind::Oracle => {
            let oracle = oracle.ok_or_else(|| Error::UnsupportedOracle("no exact solution for this problem".into()))?;
            let values = spec.grid.nodes().into_iter().map(|x| oracle.eval(x, t)).collect();
            Ok(SolutionField { grid: spec.grid, t, values })
        }
        fd => {
            let dt = dt.ok_or_else(|| Error::InvalidArgument(format!("{} needs a time step 'dt'", fd.name())))?;
            let stepper = Stepper::new(fd.stepper().expect("finite-difference solver"), dt)?;
            let sys = assemble_system(spec)?;
            let q0 = sys.initial_state(spec);
            Ok(integrate_until(&sys, &stepper, &q0, t, None)?.0)
        }
    }
}

/// Output of a command: a CSV table and a JSON summary.
#[derive(Debug, Clone)]
pub struct Report {
    pub csv: String,
    pub summary: Value,
}

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::NumericalFailure(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::NumericalFailure(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn interior_from(config: &RunConfig, resolved: &Resolved) -> Result<usize> {
    match (config.n, config.h.or(resolved.default_h)) {
        (Some(n), _) => Ok(n),
        (None, Some(h)) => interior_for_spacing(resolved.length(), h),
        (None, None) => Err(Error::InvalidArgument("grid not given: set 'n' or 'h'".into())),
    }
}

fn times_from(config: &RunConfig, resolved: &Resolved) -> Result<Vec<f64>> {
    let times = match (&config.t, resolved.default_t) {
        (Some(t), _) => t.to_vec(),
        (None, Some(t)) => vec![t],
        (None, None) => return Err(Error::InvalidArgument("final time not given: set 't'".into())),
    };
    if times.is_empty() {
        return Err(Error::InvalidArgument("time list must be nonempty".into()));
    }
    if let Some(bad) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::InvalidArgument(format!("final times must be nonnegative, got {bad}")));
    }
    Ok(times)
}

/// Solution values at each requested T: columns t, x, re, im, abs2.
pub fn cmd_solve(config: &RunConfig) -> Result<Report> {
    let resolved = Resolved::new(&config.problem)?;
    let solver = config.solver.unwrap_or(SolverKind::SdutmSeries);
    let tol = config.tol()?;
    let spec = resolved.spec(interior_from(config, &resolved)?)?;
    let times = times_from(config, &resolved)?;
    let oracle = if solver == SolverKind::Oracle { Some(resolved.oracle()?) } else { None };
    let dt = config.dt.or(resolved.default_dt);

    let mut rows = Vec::new();
    let mut max_abs = 0.0f64;
    let started = Instant::now();
    for &t in &times {
        let field = run_solver(&spec, solver, t, dt, tol, oracle.as_ref())?;
        for (x, q) in spec.grid.nodes().into_iter().zip(&field.values) {
            max_abs = max_abs.max(q.norm());
            rows.push(vec![fmt_f64(t), fmt_f64(x), fmt_f64(q.re), fmt_f64(q.im), fmt_f64(q.norm_sqr())]);
        }
    }
    let summary = json!({
        "command": "solve",
        "problem": resolved.name,
        "solver": solver.name(),
        "interior_nodes": spec.grid.interior(),
        "h": spec.grid.spacing(),
        "t": times,
        "rows": rows.len(),
        "max_abs": max_abs,
        "diagnostics": spec.diagnostics().iter().map(|d| json!({"code": d.code, "message": d.message})).collect::<Vec<_>>(),
        "seconds": started.elapsed().as_secs_f64(),
    });
    Ok(Report { csv: csv_table(&["t", "x", "re", "im", "abs2"], &rows)?, summary })
}

/// Run `jobs` on a small pool of worker threads, keeping results in job order.
fn pooled<T: Send>(jobs: usize, work: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(jobs.max(1));
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<T>>> = (0..jobs).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs {
                    break;
                }
                let r = work(i);
                *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(r);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().unwrap_or_else(|e| e.into_inner()).expect("job ran")).collect()
}

/// Max-norm error against the exact solution over an h sweep, with fitted slopes.
pub fn cmd_converge(config: &RunConfig) -> Result<Report> {
    let resolved = Resolved::new(&config.problem)?;
    let oracle = resolved.oracle()?;
    let tol = config.tol()?;
    let t = times_from(config, &resolved)?[0];
    let solvers = if !config.solvers.is_empty() {
        config.solvers.clone()
    } else {
        vec![config.solver.unwrap_or(SolverKind::SdutmSeries)]
    };
    if config.h_values.is_empty() {
        return Err(Error::InvalidArgument("h_values must be nonempty".into()));
    }
    let dt = config.dt.or(resolved.default_dt);
    let specs = config.h_values.iter().map(|&h| resolved.spec_with_spacing(h)).collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(SolverKind, usize)> =
        solvers.iter().flat_map(|&s| (0..specs.len()).map(move |i| (s, i))).collect();
    let results = pooled(jobs.len(), |j| {
        let (solver, i) = jobs[j];
        run_solver(&specs[i], solver, t, dt, tol, Some(&oracle)).map(|f| oracle.max_error(&f))
    });

    let mut rows = Vec::new();
    let mut fits = serde_json::Map::new();
    for &solver in &solvers {
        let mut hs = Vec::new();
        let mut errs = Vec::new();
        for ((s, i), r) in jobs.iter().zip(&results) {
            if *s != solver {
                continue;
            }
            let err = r.clone()?;
            let h = specs[*i].grid.spacing();
            rows.push(vec![
                solver.name().to_string(),
                fmt_f64(h),
                specs[*i].grid.interior().to_string(),
                fmt_f64(err),
            ]);
            if err > 0.0 {
                hs.push(h);
                errs.push(err);
            }
        }
        let fit = loglog_slope(&hs, &errs).ok();
        fits.insert(solver.name().to_string(), serde_json::to_value(fit).expect("serializable"));
    }
    let summary = json!({
        "command": "converge",
        "problem": resolved.name,
        "t": t,
        "dt": dt,
        "fits": fits,
    });
    Ok(Report { csv: csv_table(&["solver", "h", "n", "error"], &rows)?, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchEntry {
    pub t: f64,
    pub method: String,
    pub n_x: usize,
    /// Time steps; zero for the exact-in-time solver.
    pub n_t: usize,
    pub error: f64,
    pub seconds: f64,
    pub status: String,
}

struct Budget {
    deadline: Instant,
}

impl Budget {
    fn new(seconds: f64) -> Self {
        Budget { deadline: Instant::now() + Duration::from_secs_f64(seconds) }
    }
    fn expired(&self) -> bool {
        Instant::now() > self.deadline
    }
}

/// Error of the SD-UTM series at N interior nodes.
fn series_error(resolved: &Resolved, oracle: &ExactSolution, n: usize, t: f64, tol: f64) -> Result<f64> {
    let spec = resolved.spec(n)?;
    let f = solve_series(&spec, t, SeriesOptions { tol, ..Default::default() })?;
    Ok(oracle.max_error(&f))
}

/// Smallest grid whose error lies within 1e-4 of the target (or below it).
fn search_nx(resolved: &Resolved, oracle: &ExactSolution, t: f64, bench: &BenchConfig, tol: f64) -> Result<Option<(usize, f64)>> {
    let band = 1e-4;
    let target = bench.target;
    let mut lo = None;
    let mut n = bench.n_start.max(1);
    let (mut hi, mut hi_err) = loop {
        let err = series_error(resolved, oracle, n, t, tol)?;
        if (err - target).abs() <= band {
            return Ok(Some((n, err)));
        }
        if err < target {
            break (n, err);
        }
        lo = Some(n);
        if n >= bench.n_max {
            return Ok(None);
        }
        n = (2 * n + 1).min(bench.n_max);
    };
    // Bisection on the number of cells (N + 1).
    if let Some(mut lo) = lo {
        while hi - lo > 1 {
            let mid = (lo + hi + 2).div_ceil(2) - 1;
            let err = series_error(resolved, oracle, mid, t, tol)?;
            if (err - target).abs() <= band {
                return Ok(Some((mid, err)));
            }
            if err < target {
                hi = mid;
                hi_err = err;
            } else {
                lo = mid;
            }
        }
    }
    Ok(Some((hi, hi_err)))
}

enum FdOutcome {
    Error(f64),
    Timeout,
}

fn fd_error(spec: &ProblemSpec, kind: StepperKind, steps: usize, t: f64, oracle: &ExactSolution, budget: &Budget) -> Result<FdOutcome> {
    let sys = assemble_system(spec)?;
    let q0 = sys.initial_state(spec);
    let stepper = Stepper::new(kind, t / steps as f64)?;
    match integrate_until(&sys, &stepper, &q0, t, Some(budget.deadline)) {
        Ok((f, _)) => Ok(FdOutcome::Error(oracle.max_error(&f))),
        Err(Error::ResourceLimit(_)) => Ok(FdOutcome::Timeout),
        Err(Error::NumericalFailure(_)) => Ok(FdOutcome::Error(f64::INFINITY)),
        Err(e) => Err(e),
    }
}

/// Smallest step count whose error is within 1e-4 of `goal`; None on timeout.
fn search_nt(spec: &ProblemSpec, kind: StepperKind, t: f64, goal: f64, oracle: &ExactSolution, budget: &Budget) -> Result<Option<(usize, f64)>> {
    let accept = |e: f64| e <= goal + 1e-4;
    let mut lo = 0usize;
    let mut n = 1usize;
    let (mut hi, mut hi_err) = loop {
        if budget.expired() {
            return Ok(None);
        }
        match fd_error(spec, kind, n, t, oracle, budget)? {
            FdOutcome::Timeout => return Ok(None),
            FdOutcome::Error(e) if accept(e) => break (n, e),
            FdOutcome::Error(_) => {
                lo = n;
                n = n.checked_mul(2).ok_or_else(|| Error::ResourceLimit("step count overflow".into()))?;
            }
        }
    };
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        match fd_error(spec, kind, mid, t, oracle, budget)? {
            FdOutcome::Timeout => return Ok(None),
            FdOutcome::Error(e) if accept(e) => {
                hi = mid;
                hi_err = e;
            }
            FdOutcome::Error(_) => lo = mid,
        }
    }
    Ok(Some((hi, hi_err)))
}

fn timed<T>(runs: usize, mut f: impl FnMut() -> Result<T>) -> Result<f64> {
    let runs = runs.max(1);
    let start = Instant::now();
    for _ in 0..runs {
        std::hint::black_box(f()?);
    }
    Ok(start.elapsed().as_secs_f64() / runs as f64)
}

/// Wall-clock cost of reaching a target accuracy, per T and method.
pub fn bench_entries(config: &RunConfig) -> Result<Vec<BenchEntry>> {
    let resolved = Resolved::new(&config.problem)?;
    let oracle = resolved.oracle()?;
    let tol = config.tol()?;
    let bench = config.bench.as_ref().ok_or_else(|| Error::InvalidArgument("bench section missing".into()))?;
    if bench.t_values.is_empty() || !(bench.target > 0.0) || !(bench.cutoff > 0.0) {
        return Err(Error::InvalidArgument("bench needs a positive target, a positive cutoff and nonempty t_values".into()));
    }
    let mut entries = Vec::new();
    for &t in &bench.t_values {
        let Some((n_x, err)) = search_nx(&resolved, &oracle, t, bench, tol)? else {
            entries.push(BenchEntry {
                t,
                method: SolverKind::SdutmSeries.name().into(),
                n_x: bench.n_max,
                n_t: 0,
                error: f64::NAN,
                seconds: f64::NAN,
                status: "unreached".into(),
            });
            continue;
        };
        let spec = resolved.spec(n_x)?;
        let secs = timed(bench.runs, || solve_series(&spec, t, SeriesOptions { tol, ..Default::default() }))?;
        entries.push(BenchEntry {
            t,
            method: SolverKind::SdutmSeries.name().into(),
            n_x,
            n_t: 0,
            error: err,
            seconds: secs,
            status: "ok".into(),
        });
        for &method in &bench.methods {
            let Some(kind) = method.stepper() else {
                return Err(Error::InvalidArgument(format!("bench methods must be time steppers, got {}", method.name())));
            };
            let budget = Budget::new(bench.cutoff);
            let found = search_nt(&spec, kind, t, err, &oracle, &budget)?;
            let entry = match found {
                Some((n_t, fd_err)) => {
                    let sys = assemble_system(&spec)?;
                    let q0 = sys.initial_state(&spec);
                    let stepper = Stepper::new(kind, t / n_t as f64)?;
                    let timing = timed(bench.runs, || {
                        integrate_until(&sys, &stepper, &q0, t, Some(budget.deadline + Duration::from_secs_f64(bench.cutoff)))
                    });
                    match timing {
                        Ok(s) if s <= bench.cutoff => BenchEntry {
                            t,
                            method: method.name().into(),
                            n_x,
                            n_t,
                            error: fd_err,
                            seconds: s,
                            status: "ok".into(),
                        },
                        Ok(_) | Err(Error::ResourceLimit(_)) => timeout_entry(t, method, n_x),
                        Err(e) => return Err(e),
                    }
                }
                None => timeout_entry(t, method, n_x),
            };
            entries.push(entry);
        }
    }
    Ok(entries)
}

fn timeout_entry(t: f64, method: SolverKind, n_x: usize) -> BenchEntry {
    BenchEntry { t, method: method.name().into(), n_x, n_t: 0, error: f64::NAN, seconds: f64::NAN, status: "timeout".into() }
}

pub fn cmd_bench(config: &RunConfig) -> Result<Report> {
    let entries = bench_entries(config)?;
    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            vec![
                fmt_f64(e.t),
                e.method.clone(),
                e.n_x.to_string(),
                e.n_t.to_string(),
                fmt_f64(e.error),
                fmt_f64(e.seconds),
                e.status.clone(),
            ]
        })
        .collect();
    let summary = json!({
        "command": "bench",
        "problem": Resolved::new(&config.problem)?.name,
        "entries": entries,
    });
    Ok(Report { csv: csv_table(&["t", "method", "n_x", "n_t", "error", "seconds", "status"], &rows)?, summary })
}

/// Pairing check and diagnostics for the configured problem.
pub fn cmd_validate(config: &RunConfig) -> Result<Report> {
    let resolved = Resolved::new(&config.problem)?;
    let spec = resolved.spec(interior_from(config, &resolved)?)?;
    let report = validate_problem(&spec);
    let diagnostics: Vec<Value> =
        spec.diagnostics().iter().map(|d| json!({"code": d.code, "message": d.message})).collect();
    let rows = vec![vec![
        spec.equation.name().to_string(),
        spec.stencil.name().to_string(),
        report.accepted.to_string(),
        report.reason.to_string(),
    ]];
    let summary = json!({
        "command": "validate",
        "problem": resolved.name,
        "equation": spec.equation.name(),
        "stencil": spec.stencil.name(),
        "accepted": report.accepted,
        "reason": report.reason,
        "diagnostics": diagnostics,
    });
    Ok(Report { csv: csv_table(&["equation", "stencil", "accepted", "reason"], &rows)?, summary })
}
