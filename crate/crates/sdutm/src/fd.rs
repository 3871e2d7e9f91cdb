// SPDX-License-Identifier: Apache-2.0
//! Method-of-lines baselines: the semi-discrete system Q' = A Q + g(t) on the
//! interior unknowns, and FE / RK4 / BE / TR time stepping.

use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dispersion::validate_problem;
use crate::error::{Error, Result};
use crate::problem::{BcKind, EquationKind, Grid, ProblemSpec, Side, SolutionField, StencilKind, TimeFunction};
use crate::series::O2Closure;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Square banded matrix with `kl` sub- and `ku` super-diagonals, row-major band storage.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<C64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandMatrix { n, kl, ku, data: vec![ZERO; n * (kl + ku + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        i * (self.kl + self.ku + 1) + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        if i < self.n && j < self.n && self.in_band(i, j) {
            self.data[self.slot(i, j)]
        } else {
            ZERO
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        assert!(self.in_band(i, j), "entry ({i},{j}) outside the band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut acc = ZERO;
            for j in lo..=hi {
                acc += self.data[self.slot(i, j)] * x[j];
            }
            y[i] = acc;
        }
    }

    /// I - gamma * self.
    pub fn shifted_identity(&self, gamma: C64) -> BandMatrix {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= -gamma);
        for i in 0..self.n {
            out.add(i, i, C64::new(1.0, 0.0));
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<C64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }
}

/// LU factors of a band matrix, computed without pivoting. The operators here
/// (shifted heat/LS/advection generators) are diagonally dominant or symmetric
/// definite, so pivoting is unnecessary; a zero pivot is reported as a failure.
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
}

impl BandLu {
    pub fn factor(mut m: BandMatrix) -> Result<Self> {
        let n = m.n;
        for k in 0..n {
            let pivot = m.get(k, k);
            if pivot.norm() < 1e-300 || !pivot.re.is_finite() {
                return Err(Error::NumericalFailure(format!("zero pivot in banded solve at row {k}")));
            }
            for i in k + 1..=(k + m.kl).min(n - 1) {
                let s = m.slot(i, k);
                let factor = m.data[s] / pivot;
                m.data[s] = factor;
                for j in k + 1..=(k + m.ku).min(n - 1) {
                    let u = m.get(k, j);
                    let t = m.slot(i, j);
                    m.data[t] -= factor * u;
                }
            }
        }
        Ok(BandLu { m })
    }

    pub fn solve(&self, b: &mut [C64]) {
        let m = &self.m;
        let n = m.n;
        for i in 0..n {
            let lo = i.saturating_sub(m.kl);
            let mut acc = b[i];
            for j in lo..i {
                acc -= m.data[m.slot(i, j)] * b[j];
            }
            b[i] = acc;
        }
        for i in (0..n).rev() {
            let hi = (i + m.ku).min(n - 1);
            let mut acc = b[i];
            for j in i + 1..=hi {
                acc -= m.data[m.slot(i, j)] * b[j];
            }
            b[i] = acc / m.data[m.slot(i, i)];
        }
    }
}

/// Solve A x = b for a band matrix.
pub fn band_solve(a: &BandMatrix, b: &[C64]) -> Result<Vec<C64>> {
    let lu = BandLu::factor(a.clone())?;
    let mut x = b.to_vec();
    lu.solve(&mut x);
    Ok(x)
}

#[derive(Debug, Clone, Copy)]
struct ForcingTerm {
    row: usize,
    signal: usize,
    coeff: C64,
}

/// Q' = A Q + g(t) over the unknown nodes `first..first+dim` of the grid.
#[derive(Debug, Clone)]
pub struct OdeSystem {
    pub matrix: BandMatrix,
    signals: Vec<TimeFunction>,
    forcing: Vec<ForcingTerm>,
    first: usize,
    grid: Grid,
    left_value: Option<TimeFunction>,
    right_value: Option<TimeFunction>,
    reflected: bool,
}

#[derive(Clone, Copy)]
enum Target {
    Node(usize),
    Signal(usize),
}

struct Builder<'a> {
    spec: &'a ProblemSpec,
    signals: Vec<TimeFunction>,
    keys: Vec<(Side, usize)>,
}

impl<'a> Builder<'a> {
    fn signal(&mut self, side: Side, deriv: usize) -> Result<usize> {
        if let Some(i) = self.keys.iter().position(|k| *k == (side, deriv)) {
            return Ok(i);
        }
        let bc = self.spec.boundary(side).ok_or_else(|| Error::InvalidProblem {
            code: "missing-boundary-data",
            message: format!("{side:?} boundary condition is required"),
        })?;
        self.signals.push(bc.data.derivative(deriv)?);
        self.keys.push((side, deriv));
        Ok(self.signals.len() - 1)
    }
}

impl OdeSystem {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// True when every boundary signal is time independent.
    pub fn is_autonomous(&self) -> bool {
        self.forcing.iter().all(|f| self.signals[f.signal].is_constant())
    }

    pub fn forcing_at(&self, t: f64, out: &mut [C64]) {
        out.iter_mut().for_each(|v| *v = ZERO);
        let vals: Vec<C64> = self.signals.iter().map(|s| s.eval(t)).collect();
        for f in &self.forcing {
            out[f.row] += f.coeff * vals[f.signal];
        }
    }

    /// Q' at time t.
    pub fn rhs(&self, t: f64, q: &[C64], out: &mut [C64]) {
        let mut g = vec![ZERO; self.dim()];
        self.forcing_at(t, &mut g);
        self.matrix.matvec(q, out);
        for (o, gi) in out.iter_mut().zip(&g) {
            *o += gi;
        }
    }

    /// The unknowns' initial values taken from the problem's initial data.
    pub fn initial_state(&self, spec: &ProblemSpec) -> Vec<C64> {
        let values: Vec<C64> = if self.reflected {
            spec.initial.iter().rev().copied().collect()
        } else {
            spec.initial.clone()
        };
        values[self.first..self.first + self.dim()].to_vec()
    }

    /// Full nodal field from the unknowns, with Dirichlet values reattached.
    pub fn to_field(&self, state: &[C64], t: f64) -> SolutionField {
        let mut values = vec![ZERO; self.grid.len()];
        values[self.first..self.first + state.len()].copy_from_slice(state);
        if let Some(u) = &self.left_value {
            values[0] = u.eval(t);
        }
        if let Some(v) = &self.right_value {
            let last = values.len() - 1;
            values[last] = v.eval(t);
        }
        let field = SolutionField { grid: self.grid, t, values };
        if self.reflected {
            field.reversed()
        } else {
            field
        }
    }
}

/// Build the semi-discrete system for an accepted problem (default advection closure).
pub fn assemble_system(spec: &ProblemSpec) -> Result<OdeSystem> {
    assemble_system_with(spec, O2Closure::CenteredPair)
}

pub fn assemble_system_with(spec: &ProblemSpec, closure: O2Closure) -> Result<OdeSystem> {
    let report = validate_problem(spec);
    if !report.accepted {
        return Err(Error::unsupported(report.reason, "problem rejected by validation"));
    }
    if let EquationKind::AdvectionLeft { .. } = spec.equation {
        let mut sys = assemble_system_with(&spec.reflected(), closure)?;
        sys.reflected = true;
        return Ok(sys);
    }
    let grid = spec.grid;
    let (n, h) = (grid.interior(), grid.spacing());
    let mut b = Builder { spec, signals: Vec::new(), keys: Vec::new() };
    let mut forcing = Vec::new();
    let one = C64::new(1.0, 0.0);

    match (spec.equation, spec.stencil) {
        (EquationKind::AdvectionRight { c }, StencilKind::ForwardO1) => {
            let mut a = BandMatrix::zeros(n + 1, 0, 1);
            let v = b.signal(Side::Right, 0)?;
            for i in 0..=n {
                a.add(i, i, one * (-c / h));
                if i < n {
                    a.add(i, i + 1, one * (c / h));
                } else {
                    forcing.push(ForcingTerm { row: i, signal: v, coeff: one * (c / h) });
                }
            }
            Ok(OdeSystem {
                matrix: a,
                signals: b.signals,
                forcing,
                first: 0,
                grid,
                left_value: None,
                right_value: Some(spec.right.as_ref().unwrap().data.clone()),
                reflected: false,
            })
        }
        (EquationKind::AdvectionRight { c }, StencilKind::ForwardO2) => {
            let mut a = BandMatrix::zeros(n + 1, 0, 2);
            let v = b.signal(Side::Right, 0)?;
            let (b0, b1, b2) = closure_coefficients(closure, h, c);
            let vd = b.signal(Side::Right, 1)?;
            let vdd = if b2 != 0.0 { Some(b.signal(Side::Right, 2)?) } else { None };
            let s = c / (2.0 * h);
            for i in 0..=n {
                for (offset, w) in [(0usize, -3.0), (1, 4.0), (2, -1.0)] {
                    let j = i + offset;
                    let coeff = one * (w * s);
                    if j <= n {
                        a.add(i, j, coeff);
                    } else if j == n + 1 {
                        forcing.push(ForcingTerm { row: i, signal: v, coeff });
                    } else {
                        forcing.push(ForcingTerm { row: i, signal: v, coeff: coeff * b0 });
                        forcing.push(ForcingTerm { row: i, signal: vd, coeff: coeff * b1 });
                        if let Some(vdd) = vdd {
                            forcing.push(ForcingTerm { row: i, signal: vdd, coeff: coeff * b2 });
                        }
                    }
                }
            }
            Ok(OdeSystem {
                matrix: a,
                signals: b.signals,
                forcing,
                first: 0,
                grid,
                left_value: None,
                right_value: Some(spec.right.as_ref().unwrap().data.clone()),
                reflected: false,
            })
        }
        (EquationKind::Heat | EquationKind::LinearSchrodinger, StencilKind::CenteredO2) => {
            let kappa = spec.equation.diffusion_factor();
            let kind = spec.left.as_ref().map(|b| b.kind).unwrap_or(BcKind::Dirichlet);
            let s = kappa / (h * h);
            if kind == BcKind::Dirichlet {
                let mut a = BandMatrix::zeros(n, 1, 1);
                let u = b.signal(Side::Left, 0)?;
                let v = b.signal(Side::Right, 0)?;
                for r in 0..n {
                    a.add(r, r, -2.0 * s);
                    if r > 0 {
                        a.add(r, r - 1, s);
                    } else {
                        forcing.push(ForcingTerm { row: r, signal: u, coeff: s });
                    }
                    if r + 1 < n {
                        a.add(r, r + 1, s);
                    } else {
                        forcing.push(ForcingTerm { row: r, signal: v, coeff: s });
                    }
                }
                Ok(OdeSystem {
                    matrix: a,
                    signals: b.signals,
                    forcing,
                    first: 1,
                    grid,
                    left_value: Some(spec.left.as_ref().unwrap().data.clone()),
                    right_value: Some(spec.right.as_ref().unwrap().data.clone()),
                    reflected: false,
                })
            } else {
                // Nodes 0..=N+1 are all unknown; the end rows use first-order one-sided
                // differences for the flux: (q_1 - q_0)/h = u1 and (q_{N+1} - q_N)/h = v1.
                let dim = n + 2;
                let mut a = BandMatrix::zeros(dim, 1, 1);
                let u1 = b.signal(Side::Left, 0)?;
                let v1 = b.signal(Side::Right, 0)?;
                for r in 0..dim {
                    if r == 0 {
                        a.add(0, 0, -s);
                        a.add(0, 1, s);
                        forcing.push(ForcingTerm { row: 0, signal: u1, coeff: -kappa / h });
                    } else if r == dim - 1 {
                        a.add(r, r, -s);
                        a.add(r, r - 1, s);
                        forcing.push(ForcingTerm { row: r, signal: v1, coeff: kappa / h });
                    } else {
                        a.add(r, r - 1, s);
                        a.add(r, r, -2.0 * s);
                        a.add(r, r + 1, s);
                    }
                }
                Ok(OdeSystem {
                    matrix: a,
                    signals: b.signals,
                    forcing,
                    first: 0,
                    grid,
                    left_value: None,
                    right_value: None,
                    reflected: false,
                })
            }
        }
        (EquationKind::Heat, StencilKind::CenteredO4) => {
            if spec.left.as_ref().map(|b| b.kind) != Some(BcKind::Dirichlet) {
                return Err(Error::unsupported(
                    "no-neumann-closure",
                    "the fourth-order heat stencil is implemented for Dirichlet data only",
                ));
            }
            heat4_dirichlet_system(spec, &mut b)
        }
        _ => Err(Error::unsupported("unsupported-pair", "no finite-difference assembly for this pairing")),
    }
}

fn closure_coefficients(closure: O2Closure, h: f64, c: f64) -> (f64, f64, f64) {
    // Ghost node beyond x = L in terms of v, v', v''; see series::O2Closure.
    match closure {
        O2Closure::FirstOrder => (1.0, h / c, 0.0),
        _ => (1.0, h / c, h * h / (2.0 * c * c)),
    }
}

/// Fourth-order centered heat with Dirichlet data. Ghost nodes come from the
/// two boundary identities q_xx = u', q_xxxx = u'' (and likewise at x = L)
/// discretized to fourth order:
///   q_{-1} = 2u + h^2 u' + h^4 u''/12 - q_1,
///   q_{-2} = 2u + 4h^2 u' + 4h^4 u''/3 - q_2.
fn heat4_dirichlet_system(spec: &ProblemSpec, b: &mut Builder<'_>) -> Result<OdeSystem> {
    let grid = spec.grid;
    let (n, h) = (grid.interior(), grid.spacing());
    let n_i = n as i64;
    let h2 = h * h;
    let h4 = h2 * h2;
    let mut sig = [[0usize; 3]; 2];
    for (si, side) in [Side::Left, Side::Right].into_iter().enumerate() {
        for d in 0..3 {
            sig[si][d] = b.signal(side, d)?;
        }
    }

    // Express node j (possibly a ghost) as a combination of unknowns and signals.
    fn resolve(j: i64, n: i64, h2: f64, h4: f64, sig: &[[usize; 3]; 2], out: &mut Vec<(Target, f64)>, scale: f64) {
        if (1..=n).contains(&j) {
            out.push((Target::Node((j - 1) as usize), scale));
        } else if j == 0 {
            out.push((Target::Signal(sig[0][0]), scale));
        } else if j == n + 1 {
            out.push((Target::Signal(sig[1][0]), scale));
        } else {
            let (side, depth, mirror) = if j < 0 { (0, -j, -j) } else { (1, j - n - 1, 2 * (n + 1) - j) };
            let (c1, c2) = if depth == 1 { (h2, h4 / 12.0) } else { (4.0 * h2, 4.0 * h4 / 3.0) };
            out.push((Target::Signal(sig[side][0]), 2.0 * scale));
            out.push((Target::Signal(sig[side][1]), c1 * scale));
            out.push((Target::Signal(sig[side][2]), c2 * scale));
            resolve(mirror, n, h2, h4, sig, out, -scale);
        }
    }

    let mut a = BandMatrix::zeros(n, 2, 2);
    let mut forcing = Vec::new();
    let weights = [-1.0, 16.0, -30.0, 16.0, -1.0];
    let s = 1.0 / (12.0 * h2);
    for r in 0..n {
        let node = r as i64 + 1;
        let mut terms = Vec::new();
        for (o, w) in weights.iter().enumerate() {
            resolve(node + o as i64 - 2, n_i, h2, h4, &sig, &mut terms, w * s);
        }
        for (target, coeff) in terms {
            match target {
                Target::Node(j) => a.add(r, j, C64::new(coeff, 0.0)),
                Target::Signal(sg) => forcing.push(ForcingTerm { row: r, signal: sg, coeff: C64::new(coeff, 0.0) }),
            }
        }
    }
    Ok(OdeSystem {
        matrix: a,
        signals: b.signals.clone(),
        forcing,
        first: 1,
        grid,
        left_value: Some(spec.left.as_ref().unwrap().data.clone()),
        right_value: Some(spec.right.as_ref().unwrap().data.clone()),
        reflected: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepperKind {
    Fe,
    Rk4,
    Be,
    Tr,
}

impl StepperKind {
    pub fn name(&self) -> &'static str {
        match self {
            StepperKind::Fe => "fe",
            StepperKind::Rk4 => "rk4",
            StepperKind::Be => "be",
            StepperKind::Tr => "tr",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stepper {
    pub kind: StepperKind,
    pub dt: f64,
}

impl Stepper {
    pub fn new(kind: StepperKind, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        Ok(Stepper { kind, dt })
    }
}

/// Stepping workspace; caches the implicit factorization for a fixed step size.
struct Engine<'a> {
    sys: &'a OdeSystem,
    kind: StepperKind,
    dt: f64,
    lu: Option<BandLu>,
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
    g0: Vec<C64>,
    g1: Vec<C64>,
}

impl<'a> Engine<'a> {
    fn new(sys: &'a OdeSystem, kind: StepperKind, dt: f64) -> Result<Self> {
        let d = sys.dim();
        let lu = match kind {
            StepperKind::Be => Some(BandLu::factor(sys.matrix.shifted_identity(C64::new(dt, 0.0)))?),
            StepperKind::Tr => Some(BandLu::factor(sys.matrix.shifted_identity(C64::new(0.5 * dt, 0.0)))?),
            _ => None,
        };
        let z = vec![ZERO; d];
        Ok(Engine {
            sys,
            kind,
            dt,
            lu,
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            tmp: z.clone(),
            g0: z.clone(),
            g1: z,
        })
    }

    fn step(&mut self, q: &mut [C64], t: f64) {
        let dt = self.dt;
        let sys = self.sys;
        match self.kind {
            StepperKind::Fe => {
                sys.rhs(t, q, &mut self.k[0]);
                for (qi, ki) in q.iter_mut().zip(&self.k[0]) {
                    *qi += ki * dt;
                }
            }
            StepperKind::Rk4 => {
                sys.rhs(t, q, &mut self.k[0]);
                for (stage, (frac, src)) in [(0.5, 0usize), (0.5, 1), (1.0, 2)].into_iter().enumerate() {
                    for i in 0..q.len() {
                        self.tmp[i] = q[i] + self.k[src][i] * (frac * dt);
                    }
                    let (_, tail) = self.k.split_at_mut(stage + 1);
                    sys.rhs(t + frac * dt, &self.tmp, &mut tail[0]);
                }
                for i in 0..q.len() {
                    q[i] += (self.k[0][i] + 2.0 * self.k[1][i] + 2.0 * self.k[2][i] + self.k[3][i]) * (dt / 6.0);
                }
            }
            StepperKind::Be => {
                sys.forcing_at(t + dt, &mut self.g1);
                for (qi, gi) in q.iter_mut().zip(&self.g1) {
                    *qi += gi * dt;
                }
                self.lu.as_ref().unwrap().solve(q);
            }
            StepperKind::Tr => {
                sys.forcing_at(t, &mut self.g0);
                sys.forcing_at(t + dt, &mut self.g1);
                sys.matrix.matvec(q, &mut self.tmp);
                for i in 0..q.len() {
                    q[i] += (self.tmp[i] + self.g0[i] + self.g1[i]) * (0.5 * dt);
                }
                self.lu.as_ref().unwrap().solve(q);
            }
        }
    }
}

/// One step of size `stepper.dt` from time t.
pub fn step(system: &OdeSystem, stepper: &Stepper, q: &[C64], t: f64) -> Result<Vec<C64>> {
    if q.len() != system.dim() {
        return Err(Error::InvalidArgument(format!(
            "state has {} entries, system has {}",
            q.len(),
            system.dim()
        )));
    }
    let mut engine = Engine::new(system, stepper.kind, stepper.dt)?;
    let mut out = q.to_vec();
    engine.step(&mut out, t);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationReport {
    pub steps: usize,
    /// Length of a final shortened step, when T is not a multiple of dt.
    pub partial_step: Option<f64>,
}

/// Advance `q0` from t = 0 to T.
pub fn integrate(system: &OdeSystem, stepper: &Stepper, q0: &[C64], t_final: f64) -> Result<(SolutionField, IntegrationReport)> {
    integrate_until(system, stepper, q0, t_final, None)
}

/// As [`integrate`], abandoning the run with resource-limit once `deadline` passes.
pub fn integrate_until(
    system: &OdeSystem,
    stepper: &Stepper,
    q0: &[C64],
    t_final: f64,
    deadline: Option<Instant>,
) -> Result<(SolutionField, IntegrationReport)> {
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(Error::InvalidArgument(format!("final time must be nonnegative, got {t_final}")));
    }
    if q0.len() != system.dim() {
        return Err(Error::InvalidArgument("initial state does not match the system size".into()));
    }
    let dt = stepper.dt;
    let ratio = t_final / dt;
    let mut full = ratio.round();
    let mut partial = None;
    if (full - ratio).abs() > 1e-9 * ratio.max(1.0) {
        full = ratio.floor();
        let rest = t_final - full * dt;
        if rest > 0.0 {
            partial = Some(rest);
        }
    }
    let full = full as usize;
    let mut q = q0.to_vec();
    let mut engine = Engine::new(system, stepper.kind, dt)?;
    for s in 0..full {
        engine.step(&mut q, s as f64 * dt);
        if s % 256 == 255 {
            if let Some(d) = deadline {
                if Instant::now() > d {
                    return Err(Error::ResourceLimit("time-stepping exceeded its wall-clock budget".into()));
                }
            }
            if q.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::NumericalFailure(format!("{} produced non-finite values", stepper.kind.name())));
            }
        }
    }
    if let Some(rest) = partial {
        let mut last = Engine::new(system, stepper.kind, rest)?;
        last.step(&mut q, full as f64 * dt);
    }
    if q.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NumericalFailure(format!("{} produced non-finite values", stepper.kind.name())));
    }
    Ok((system.to_field(&q, t_final), IntegrationReport { steps: full + partial.is_some() as usize, partial_step: partial }))
}

/// Convenience: assemble, take the initial state from the problem and integrate.
pub fn solve_fd(spec: &ProblemSpec, stepper: &Stepper, t_final: f64) -> Result<SolutionField> {
    let sys = assemble_system(spec)?;
    let q0 = sys.initial_state(spec);
    Ok(integrate(&sys, stepper, &q0, t_final)?.0)
}
