// SPDX-License-Identifier: Apache-2.0
//! Problem definition: grid, equation/stencil choice, boundary and initial data.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid x_n = n h, n = 0..=N+1, with h = L/(N+1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    l: f64,
    n: usize,
    h: f64,
}

/// Build a grid with `n` interior nodes on [0, L].
pub fn make_grid(l: f64, n: usize) -> Result<Grid> {
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidArgument(format!("domain length must be positive, got {l}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("at least one interior node is required".into()));
    }
    Ok(Grid { l, n, h: l / (n as f64 + 1.0) })
}

impl Grid {
    /// Grid with spacing `h`; L/h must be an integer (up to rounding).
    pub fn from_spacing(l: f64, h: f64) -> Result<Grid> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidArgument(format!("grid spacing must be positive, got {h}")));
        }
        let cells = (l / h).round();
        if cells < 2.0 || ((cells * h - l).abs() > 1e-9 * l) {
            return Err(Error::InvalidArgument(format!(
                "spacing {h} does not divide the domain length {l} into at least two cells"
            )));
        }
        make_grid(l, cells as usize - 1)
    }

    pub fn length(&self) -> f64 {
        self.l
    }

    /// Number of interior nodes N.
    pub fn interior(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Total node count N+2.
    pub fn len(&self) -> usize {
        self.n + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.n + 1 {
            self.l
        } else {
            i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    /// Index of the node at `x`, if `x` is within rounding of a node.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let r = (x / self.h).round();
        if r < 0.0 || r > (self.n + 1) as f64 {
            return None;
        }
        let i = r as usize;
        ((self.x(i) - x).abs() <= 1e-9 * self.h).then_some(i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EquationKind {
    /// q_t = c q_x, information travelling leftward from x = L.
    AdvectionRight { c: f64 },
    /// q_t = -c q_x, information travelling rightward from x = 0.
    AdvectionLeft { c: f64 },
    Heat,
    /// i q_t + q_xx / 2 = 0.
    LinearSchrodinger,
}

impl EquationKind {
    pub fn name(&self) -> &'static str {
        match self {
            EquationKind::AdvectionRight { .. } => "advection-right",
            EquationKind::AdvectionLeft { .. } => "advection-left",
            EquationKind::Heat => "heat",
            EquationKind::LinearSchrodinger => "linear-schrodinger",
        }
    }

    pub fn is_advection(&self) -> bool {
        matches!(self, EquationKind::AdvectionRight { .. } | EquationKind::AdvectionLeft { .. })
    }

    /// Coefficient multiplying the second difference for the diffusive equations.
    pub(crate) fn diffusion_factor(&self) -> C64 {
        match self {
            EquationKind::LinearSchrodinger => C64::new(0.0, 0.5),
            _ => C64::new(1.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StencilKind {
    ForwardO1,
    ForwardO2,
    BackwardO1,
    BackwardO2,
    CenteredO2,
    CenteredO4,
}

impl StencilKind {
    pub fn name(&self) -> &'static str {
        match self {
            StencilKind::ForwardO1 => "forward-o1",
            StencilKind::ForwardO2 => "forward-o2",
            StencilKind::BackwardO1 => "backward-o1",
            StencilKind::BackwardO2 => "backward-o2",
            StencilKind::CenteredO2 => "centered-o2",
            StencilKind::CenteredO4 => "centered-o4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string())).ok()
    }

    /// The mirror-image stencil under x -> L - x.
    pub fn mirrored(&self) -> Self {
        match self {
            StencilKind::ForwardO1 => StencilKind::BackwardO1,
            StencilKind::ForwardO2 => StencilKind::BackwardO2,
            StencilKind::BackwardO1 => StencilKind::ForwardO1,
            StencilKind::BackwardO2 => StencilKind::ForwardO2,
            other => *other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

/// One term p(t) e^{r t} of a closed-form time function.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPolyTerm {
    /// Polynomial coefficients, lowest degree first.
    pub poly: Vec<C64>,
    pub rate: C64,
}

impl ExpPolyTerm {
    fn eval(&self, t: f64) -> C64 {
        let p = self.poly.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * t + c);
        p * (self.rate * t).exp()
    }

    fn differentiate(&self) -> ExpPolyTerm {
        let n = self.poly.len();
        let mut out = vec![C64::new(0.0, 0.0); n.max(1)];
        for j in 0..n {
            out[j] += self.rate * self.poly[j];
            if j > 0 {
                out[j - 1] += self.poly[j] * j as f64;
            }
        }
        ExpPolyTerm { poly: out, rate: self.rate }
    }

    fn shifted(&self, t0: f64) -> ExpPolyTerm {
        // p(t + t0) expanded by the binomial theorem, scaled by e^{r t0}.
        let n = self.poly.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (j, &c) in self.poly.iter().enumerate() {
            let mut binom = 1.0;
            for i in 0..=j {
                out[i] += c * binom * t0.powi((j - i) as i32);
                binom *= (j - i) as f64 / (i + 1) as f64;
            }
        }
        let scale = (self.rate * t0).exp();
        ExpPolyTerm { poly: out.into_iter().map(|c| c * scale).collect(), rate: self.rate }
    }

    pub(crate) fn degree(&self) -> usize {
        self.poly.iter().rposition(|c| *c != C64::new(0.0, 0.0)).unwrap_or(0)
    }
}

pub type ScalarFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    ExpPoly(Vec<ExpPolyTerm>),
    /// Value followed by whatever derivatives the caller supplied.
    Custom(Vec<ScalarFn>),
}

/// Boundary data as a function of time.
///
/// Closed-form data (sums of polynomial times exponential terms, which covers
/// constants, polynomials and sinusoids) carries exact derivatives and exact
/// time transforms. Arbitrary closures are handled by quadrature and only have
/// the derivatives the caller provides.
#[derive(Clone)]
pub struct TimeFunction {
    repr: Repr,
}

impl fmt::Debug for TimeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::ExpPoly(terms) => f.debug_tuple("TimeFunction::ExpPoly").field(terms).finish(),
            Repr::Custom(fns) => write!(f, "TimeFunction::Custom(<{} fns>)", fns.len()),
        }
    }
}

impl TimeFunction {
    pub fn constant(value: impl Into<C64>) -> Self {
        Self::polynomial(vec![value.into()])
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn polynomial(coeffs: Vec<C64>) -> Self {
        Self::exp_poly(vec![ExpPolyTerm { poly: coeffs, rate: C64::new(0.0, 0.0) }])
    }

    pub fn exponential(amplitude: impl Into<C64>, rate: impl Into<C64>) -> Self {
        Self::exp_poly(vec![ExpPolyTerm { poly: vec![amplitude.into()], rate: rate.into() }])
    }

    /// a sin(w t).
    pub fn sine(a: f64, w: f64) -> Self {
        let c = C64::new(0.0, -0.5 * a);
        Self::exp_poly(vec![
            ExpPolyTerm { poly: vec![c], rate: C64::new(0.0, w) },
            ExpPolyTerm { poly: vec![-c], rate: C64::new(0.0, -w) },
        ])
    }

    /// a cos(w t).
    pub fn cosine(a: f64, w: f64) -> Self {
        let c = C64::new(0.5 * a, 0.0);
        Self::exp_poly(vec![
            ExpPolyTerm { poly: vec![c], rate: C64::new(0.0, w) },
            ExpPolyTerm { poly: vec![c], rate: C64::new(0.0, -w) },
        ])
    }

    pub fn exp_poly(terms: Vec<ExpPolyTerm>) -> Self {
        let terms = terms
            .into_iter()
            .map(|mut t| {
                if t.poly.is_empty() {
                    t.poly.push(C64::new(0.0, 0.0));
                }
                t
            })
            .collect();
        TimeFunction { repr: Repr::ExpPoly(terms) }
    }

    /// Arbitrary data without derivative information.
    pub fn custom(f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        TimeFunction { repr: Repr::Custom(vec![Arc::new(f)]) }
    }

    /// Arbitrary data with derivatives: `fns[k]` is the k-th derivative.
    pub fn custom_with_derivatives(fns: Vec<ScalarFn>) -> Result<Self> {
        if fns.is_empty() {
            return Err(Error::InvalidArgument("custom time function needs a value".into()));
        }
        Ok(TimeFunction { repr: Repr::Custom(fns) })
    }

    pub fn eval(&self, t: f64) -> C64 {
        match &self.repr {
            Repr::ExpPoly(terms) => terms.iter().map(|term| term.eval(t)).sum(),
            Repr::Custom(fns) => fns[0](t),
        }
    }

    /// Number of derivatives available (unbounded for closed forms).
    pub fn available_derivatives(&self) -> usize {
        match &self.repr {
            Repr::ExpPoly(_) => usize::MAX,
            Repr::Custom(fns) => fns.len() - 1,
        }
    }

    /// The k-th derivative as a time function.
    pub fn derivative(&self, k: usize) -> Result<TimeFunction> {
        match &self.repr {
            Repr::ExpPoly(terms) => {
                let mut terms = terms.clone();
                for _ in 0..k {
                    terms = terms.iter().map(ExpPolyTerm::differentiate).collect();
                }
                Ok(TimeFunction { repr: Repr::ExpPoly(terms) })
            }
            Repr::Custom(fns) => {
                if k < fns.len() {
                    Ok(TimeFunction { repr: Repr::Custom(fns[k..].to_vec()) })
                } else {
                    Err(Error::derivatives_required(&format!(
                        "derivative of order {k} of boundary data was not supplied"
                    )))
                }
            }
        }
    }

    pub fn derivative_at(&self, k: usize, t: f64) -> Result<C64> {
        Ok(self.derivative(k)?.eval(t))
    }

    /// The function t -> v(t + t0).
    pub fn shifted(&self, t0: f64) -> TimeFunction {
        match &self.repr {
            Repr::ExpPoly(terms) => TimeFunction {
                repr: Repr::ExpPoly(terms.iter().map(|t| t.shifted(t0)).collect()),
            },
            Repr::Custom(fns) => TimeFunction {
                repr: Repr::Custom(
                    fns.iter()
                        .map(|f| {
                            let f = f.clone();
                            Arc::new(move |t: f64| f(t + t0)) as ScalarFn
                        })
                        .collect(),
                ),
            },
        }
    }

    pub fn scaled(&self, s: C64) -> TimeFunction {
        match &self.repr {
            Repr::ExpPoly(terms) => TimeFunction {
                repr: Repr::ExpPoly(
                    terms
                        .iter()
                        .map(|t| ExpPolyTerm {
                            poly: t.poly.iter().map(|c| c * s).collect(),
                            rate: t.rate,
                        })
                        .collect(),
                ),
            },
            Repr::Custom(fns) => TimeFunction {
                repr: Repr::Custom(
                    fns.iter()
                        .map(|f| {
                            let f = f.clone();
                            Arc::new(move |t: f64| f(t) * s) as ScalarFn
                        })
                        .collect(),
                ),
            },
        }
    }

    pub fn terms(&self) -> Option<&[ExpPolyTerm]> {
        match &self.repr {
            Repr::ExpPoly(terms) => Some(terms),
            Repr::Custom(_) => None,
        }
    }

    /// Constant value, if the closed form is time independent.
    pub fn constant_value(&self) -> Option<C64> {
        let terms = self.terms()?;
        let mut total = C64::new(0.0, 0.0);
        for term in terms {
            let coeff = term.poly[0];
            let tail_zero = term.poly[1..].iter().all(|c| *c == C64::new(0.0, 0.0));
            if !tail_zero {
                return None;
            }
            if coeff == C64::new(0.0, 0.0) {
                continue;
            }
            if term.rate != C64::new(0.0, 0.0) {
                return None;
            }
            total += coeff;
        }
        Some(total)
    }

    pub fn is_constant(&self) -> bool {
        self.constant_value().is_some()
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryCondition {
    pub kind: BcKind,
    pub data: TimeFunction,
}

impl BoundaryCondition {
    pub fn dirichlet(data: TimeFunction) -> Self {
        BoundaryCondition { kind: BcKind::Dirichlet, data }
    }

    pub fn neumann(data: TimeFunction) -> Self {
        BoundaryCondition { kind: BcKind::Neumann, data }
    }
}

/// Sample `f` on every grid node, boundaries included.
pub fn sample_initial(grid: &Grid, f: impl Fn(f64) -> C64) -> Vec<C64> {
    grid.nodes().into_iter().map(f).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub code: &'static str,
    pub message: String,
}

/// A fully specified semi-discrete initial-boundary value problem.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub equation: EquationKind,
    pub stencil: StencilKind,
    pub grid: Grid,
    /// Initial values on all N+2 nodes.
    pub initial: Vec<C64>,
    pub left: Option<BoundaryCondition>,
    pub right: Option<BoundaryCondition>,
}

impl ProblemSpec {
    pub fn new(
        equation: EquationKind,
        stencil: StencilKind,
        grid: Grid,
        initial: Vec<C64>,
        left: Option<BoundaryCondition>,
        right: Option<BoundaryCondition>,
    ) -> Result<Self> {
        if initial.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "initial data has {} values but the grid has {} nodes",
                initial.len(),
                grid.len()
            )));
        }
        if initial.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument("initial data contains non-finite values".into()));
        }
        if let EquationKind::AdvectionRight { c } | EquationKind::AdvectionLeft { c } = equation {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::InvalidArgument(format!("advection speed must be positive, got {c}")));
            }
        }
        Ok(ProblemSpec { equation, stencil, grid, initial, left, right })
    }

    pub fn boundary(&self, side: Side) -> Option<&BoundaryCondition> {
        match side {
            Side::Left => self.left.as_ref(),
            Side::Right => self.right.as_ref(),
        }
    }

    pub(crate) fn require_boundary(&self, side: Side, kind: BcKind) -> Result<&TimeFunction> {
        match self.boundary(side) {
            Some(bc) if bc.kind == kind => Ok(&bc.data),
            Some(_) => Err(Error::unsupported(
                "boundary-kind-mismatch",
                format!("{side:?} boundary must be {kind:?} for this solver"),
            )),
            None => Err(Error::InvalidProblem {
                code: "missing-boundary-data",
                message: format!("{side:?} boundary condition is required"),
            }),
        }
    }

    pub fn advection_speed(&self) -> Option<f64> {
        match self.equation {
            EquationKind::AdvectionRight { c } | EquationKind::AdvectionLeft { c } => Some(c),
            _ => None,
        }
    }

    /// Warnings about data that is legal but degrades accuracy.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let n_last = self.grid.len() - 1;
        for (side, node) in [(Side::Left, 0), (Side::Right, n_last)] {
            if let Some(bc) = self.boundary(side) {
                if bc.kind == BcKind::Dirichlet {
                    let b = bc.data.eval(0.0);
                    let phi = self.initial[node];
                    if (b - phi).norm() > 1e-10 * (1.0 + b.norm()) {
                        out.push(Diagnostic {
                            code: "corner-incompatible",
                            message: format!(
                                "{side:?} boundary value {b} differs from the initial value {phi} at t = 0"
                            ),
                        });
                    }
                }
            }
        }
        out
    }

    /// Mirror image under x -> L - x; turns leftward-travelling advection into
    /// rightward-travelling advection with the mirrored stencil.
    pub fn reflected(&self) -> ProblemSpec {
        let equation = match self.equation {
            EquationKind::AdvectionLeft { c } => EquationKind::AdvectionRight { c },
            EquationKind::AdvectionRight { c } => EquationKind::AdvectionLeft { c },
            other => other,
        };
        let flip = |bc: &Option<BoundaryCondition>| {
            bc.clone().map(|mut bc| {
                if bc.kind == BcKind::Neumann {
                    bc.data = bc.data.scaled(C64::new(-1.0, 0.0));
                }
                bc
            })
        };
        ProblemSpec {
            equation,
            stencil: self.stencil.mirrored(),
            grid: self.grid,
            initial: self.initial.iter().rev().copied().collect(),
            left: flip(&self.right),
            right: flip(&self.left),
        }
    }
}

/// Values on every grid node at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub grid: Grid,
    pub t: f64,
    pub values: Vec<C64>,
}

impl SolutionField {
    pub fn max_abs_diff(&self, other: &SolutionField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest nodal deviation from `exact(x)`.
    pub fn max_error(&self, exact: impl Fn(f64) -> C64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| (v - exact(self.grid.x(i))).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn reversed(mut self) -> SolutionField {
        self.values.reverse();
        self
    }
}
