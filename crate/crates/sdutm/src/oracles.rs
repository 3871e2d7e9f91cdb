// SPDX-License-Identifier: Apache-2.0
//! Independent ground truth: exact PDE solutions for the reference problems and
//! a dense matrix-exponential solver for the semi-discrete ODE systems.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fd::{integrate, OdeSystem, Stepper, StepperKind};
use crate::problem::{EquationKind, ProblemSpec, SolutionField, TimeFunction};
use crate::quad::gauss_legendre;

const ZERO: C64 = C64::new(0.0, 0.0);

pub type SpaceFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// q(x, t) in closed form or as a converged expansion.
#[derive(Clone)]
pub struct ExactSolution {
    f: Arc<dyn Fn(f64, f64) -> C64 + Send + Sync>,
    pub description: String,
}

impl fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactSolution({})", self.description)
    }
}

impl ExactSolution {
    pub fn new(description: impl Into<String>, f: impl Fn(f64, f64) -> C64 + Send + Sync + 'static) -> Self {
        ExactSolution { f: Arc::new(f), description: description.into() }
    }

    pub fn eval(&self, x: f64, t: f64) -> C64 {
        (self.f)(x, t)
    }

    /// Max-norm error of a nodal field against this solution.
    pub fn max_error(&self, field: &SolutionField) -> f64 {
        field.max_error(|x| self.eval(x, field.t))
    }
}

/// Characteristics solution of q_t = c q_x on [0, L] with inflow data v at x = L.
pub fn advection_traveling_wave(phi: SpaceFn, v: TimeFunction, c: f64, l: f64) -> ExactSolution {
    ExactSolution::new("travelling wave", move |x, t| {
        if x + c * t < l {
            phi(x + c * t)
        } else {
            v.eval((x - l) / c + t)
        }
    })
}

/// q = 2x + sin(5 pi x) exp(-25 pi^2 t), heat equation with q(0) = 0, q(1) = 2.
pub fn heat_dirichlet_example() -> ExactSolution {
    ExactSolution::new("2x + sin(5 pi x) exp(-25 pi^2 t)", |x, t| {
        C64::new(2.0 * x + (5.0 * PI * x).sin() * (-25.0 * PI * PI * t).exp(), 0.0)
    })
}

/// Boundary data accepted by [`separation_series`].
#[derive(Clone, Debug)]
pub enum OracleBoundary {
    Dirichlet { left: TimeFunction, right: TimeFunction },
    Neumann { left: TimeFunction, right: TimeFunction },
}

fn affine_in_t(f: &TimeFunction) -> Option<(C64, C64)> {
    let terms = f.terms()?;
    let mut c0 = ZERO;
    let mut c1 = ZERO;
    for term in terms {
        if term.poly.iter().all(|c| *c == ZERO) {
            continue;
        }
        if term.rate != ZERO || term.degree() > 1 {
            return None;
        }
        c0 += term.poly[0];
        if term.poly.len() > 1 {
            c1 += term.poly[1];
        }
    }
    Some((c0, c1))
}

/// Composite Gauss-Legendre quadrature nodes/weights on [0, L].
fn composite_rule(l: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(order);
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    let width = l / panels as f64;
    for p in 0..panels {
        let a = p as f64 * width;
        for (x, w) in gx.iter().zip(&gw) {
            xs.push(a + 0.5 * width * (x + 1.0));
            ws.push(0.5 * width * w);
        }
    }
    (xs, ws)
}

/// Second derivative at an endpoint by a one-sided fourth-order difference.
fn endpoint_second_derivative(f: &dyn Fn(f64) -> C64, x0: f64, dir: f64) -> C64 {
    let d = 1e-3;
    let s = |j: f64| f(x0 + dir * j * d);
    (s(0.0) * (15.0 / 4.0) - s(1.0) * (77.0 / 6.0) + s(2.0) * (107.0 / 6.0) - s(3.0) * 13.0 + s(4.0) * (61.0 / 12.0)
        - s(5.0) * (5.0 / 6.0))
        / (d * d)
}

/// Separation-of-variables solution of q_t = kappa q_xx on [0, L] (kappa = 1 for
/// heat, i/2 for Schrodinger) with Dirichlet data affine in t or constant Neumann
/// data. Modal coefficients come from composite Gauss-Legendre quadrature.
///
/// For Dirichlet data the initial remainder is split into a cubic carrying its
/// endpoint curvature (whose sine coefficients are known exactly and are summed
/// to 64 M terms) and a smoother part expanded in M modes.
pub fn separation_series(
    equation: EquationKind,
    phi: SpaceFn,
    boundary: OracleBoundary,
    l: f64,
    modes: usize,
) -> Result<ExactSolution> {
    let kappa = match equation {
        EquationKind::Heat => C64::new(1.0, 0.0),
        EquationKind::LinearSchrodinger => C64::new(0.0, 0.5),
        _ => return Err(Error::UnsupportedOracle("separation of variables covers heat and Schrodinger only".into())),
    };
    if modes == 0 {
        return Err(Error::InvalidArgument("at least one mode is required".into()));
    }
    let (xs, ws) = composite_rule(l, (modes / 2).max(16) * 2, 16);
    match boundary {
        OracleBoundary::Dirichlet { left, right } => {
            let (Some((u0, u1)), Some((v0, v1))) = (affine_in_t(&left), affine_in_t(&right)) else {
                return Err(Error::UnsupportedOracle("Dirichlet data must be constant or linear in t".into()));
            };
            // Particular part w = u(t)(1 - x/L) + v(t) x/L + p(x), with kappa p'' = u1 (1 - x/L) + v1 x/L.
            let pc = -(u1 * l / 3.0 + v1 * l / 6.0) / kappa;
            let particular = move |x: f64, t: f64| {
                let p = (u1 * (x * x / 2.0 - x * x * x / (6.0 * l)) + v1 * x * x * x / (6.0 * l)) / kappa + pc * x;
                (u0 + u1 * t) * (1.0 - x / l) + (v0 + v1 * t) * (x / l) + p
            };
            let r0 = {
                let phi = phi.clone();
                move |x: f64| phi(x) - particular(x, 0.0)
            };
            let alpha = endpoint_second_derivative(&r0, 0.0, 1.0);
            let beta = endpoint_second_derivative(&r0, l, -1.0);
            let dcoef = -alpha * l / 2.0 - (beta - alpha) * l / 6.0;
            let cubic = move |x: f64| alpha * x * x / 2.0 + (beta - alpha) * x * x * x / (6.0 * l) + dcoef * x;

            let mut coef = vec![ZERO; modes + 1];
            for (x, w) in xs.iter().zip(&ws) {
                let g = (r0(*x) - cubic(*x)) * (*w * 2.0 / l);
                let theta = PI * x / l;
                let (s1, c1) = theta.sin_cos();
                let (mut sm, mut s) = (0.0, s1);
                for c in coef.iter_mut().skip(1) {
                    *c += g * s;
                    let next = 2.0 * c1 * s - sm;
                    sm = s;
                    s = next;
                }
            }
            let tail_modes = 64 * modes;
            let mut tail: Vec<C64> = (0..=tail_modes)
                .map(|n| {
                    if n == 0 {
                        return ZERO;
                    }
                    let k = n as f64 * PI / l;
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    -(alpha - beta * sign) * (2.0 / l) / (k * k * k)
                })
                .collect();
            for (n, c) in coef.iter().enumerate().skip(1) {
                tail[n] += c;
            }
            let cache = ModeCache::new(tail, kappa, l);
            Ok(ExactSolution::new(format!("sine series, {modes} modes"), move |x, t| {
                let factors = cache.at(t);
                let mut acc = particular(x, t);
                let theta = PI * x / l;
                let (s1, c1) = theta.sin_cos();
                let (mut sm, mut s) = (0.0, s1);
                for a in &factors[1..] {
                    acc += a * s;
                    let next = 2.0 * c1 * s - sm;
                    sm = s;
                    s = next;
                }
                acc
            }))
        }
        OracleBoundary::Neumann { left, right } => {
            let (Some(u1), Some(v1)) = (left.constant_value(), right.constant_value()) else {
                return Err(Error::UnsupportedOracle("Neumann data must be constant".into()));
            };
            let a = (v1 - u1) / (2.0 * l);
            let b = kappa * 2.0 * a;
            let mut coef = vec![ZERO; modes + 1];
            for (x, w) in xs.iter().zip(&ws) {
                let g = (phi(*x) - a * x * x - u1 * x) * (*w / l);
                let theta = PI * x / l;
                let c1 = theta.cos();
                let (mut cm, mut c) = (c1, 1.0);
                for (n, out) in coef.iter_mut().enumerate() {
                    *out += g * c * if n == 0 { 1.0 } else { 2.0 };
                    let next = 2.0 * c1 * c - cm;
                    cm = c;
                    c = next;
                }
            }
            let offset = coef[0];
            let cache = ModeCache::new(coef, kappa, l);
            Ok(ExactSolution::new(format!("cosine series, {modes} modes"), move |x, t| {
                let factors = cache.at(t);
                let mut acc = a * x * x + u1 * x + b * t + offset;
                let theta = PI * x / l;
                let c1 = theta.cos();
                let (mut cm, mut c) = (1.0, c1);
                for an in &factors[1..] {
                    acc += an * c;
                    let next = 2.0 * c1 * c - cm;
                    cm = c;
                    c = next;
                }
                acc
            }))
        }
    }
}

/// Modal amplitudes a_n exp(-kappa (n pi/L)^2 t), memoized for the last t seen,
/// with trailing modes that have decayed to zero dropped.
struct ModeCache {
    amplitudes: Vec<C64>,
    kappa: C64,
    l: f64,
    last: Mutex<Option<(f64, Arc<Vec<C64>>)>>,
}

impl ModeCache {
    fn new(amplitudes: Vec<C64>, kappa: C64, l: f64) -> Self {
        ModeCache { amplitudes, kappa, l, last: Mutex::new(None) }
    }

    fn at(&self, t: f64) -> Arc<Vec<C64>> {
        let mut guard = self.last.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((t0, f)) = guard.as_ref() {
            if *t0 == t {
                return f.clone();
            }
        }
        let mut f: Vec<C64> = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(n, a)| {
                let k = n as f64 * PI / self.l;
                a * (-self.kappa * k * k * t).exp()
            })
            .collect();
        while f.len() > 1 && f[f.len() - 1] == ZERO {
            f.pop();
        }
        let f = Arc::new(f);
        *guard = Some((t, f.clone()));
        f
    }
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Dense matrix exponential by scaling and squaring with a degree-13 Pade approximant.
pub fn expm(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = a.nrows();
    let norm1 = (0..n).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    if !norm1.is_finite() {
        return Err(Error::NumericalFailure("matrix has non-finite entries".into()));
    }
    let theta13 = 5.371920351148152;
    let s = if norm1 > theta13 { (norm1 / theta13).log2().ceil() as i32 } else { 0 };
    let a = a * C64::new(0.5f64.powi(s), 0.0);
    let id = DMatrix::<C64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |i: usize| C64::new(PADE13[i], 0.0);
    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9)) + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8)) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::NumericalFailure("singular Pade denominator".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// Largest system handled by the dense exponential.
pub const EXPM_MAX_DIM: usize = 2000;

/// Q(T) for Q' = A Q + g with constant g, via exp of the augmented matrix [[A, g], [0, 0]].
pub fn expm_solve(system: &OdeSystem, q0: &[C64], t: f64) -> Result<Vec<C64>> {
    let d = system.dim();
    if d + 1 > EXPM_MAX_DIM {
        return Err(Error::ResourceLimit(format!("dense exponential limited to {EXPM_MAX_DIM} unknowns, got {d}")));
    }
    if !system.is_autonomous() {
        return Err(Error::UnsupportedOracle("matrix exponential needs time-independent forcing".into()));
    }
    let mut g = vec![ZERO; d];
    system.forcing_at(0.0, &mut g);
    let mut m = DMatrix::<C64>::zeros(d + 1, d + 1);
    for i in 0..d {
        for j in i.saturating_sub(2)..(i + 3).min(d) {
            m[(i, j)] = system.matrix.get(i, j) * t;
        }
        m[(i, d)] = g[i] * t;
    }
    let e = expm(&m)?;
    Ok((0..d).map(|i| (0..d).map(|j| e[(i, j)] * q0[j]).sum::<C64>() + e[(i, d)]).collect())
}

/// High-resolution RK4 reference. By default the step keeps ||A||_inf dt at
/// 2e-3, for a global error near 1e-13 relative to the data.
pub fn rk4_reference(system: &OdeSystem, q0: &[C64], t: f64, steps: Option<usize>) -> Result<SolutionField> {
    if t == 0.0 {
        return Ok(system.to_field(q0, 0.0));
    }
    let steps = steps.unwrap_or_else(|| {
        let d = system.dim();
        let norm = (0..d)
            .map(|i| (i.saturating_sub(2)..(i + 3).min(d)).map(|j| system.matrix.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max);
        ((norm * t / 2e-3).ceil() as usize).max(1000)
    });
    let stepper = Stepper::new(StepperKind::Rk4, t / steps as f64)?;
    Ok(integrate(system, &stepper, q0, t)?.0)
}

/// Exact solution of the semi-discrete system: expm for constant boundary data,
/// otherwise high-resolution RK4.
pub fn semidiscrete_reference(spec: &ProblemSpec, t: f64) -> Result<SolutionField> {
    let sys = crate::fd::assemble_system(spec)?;
    let q0 = sys.initial_state(spec);
    if sys.is_autonomous() {
        let q = expm_solve(&sys, &q0, t)?;
        Ok(sys.to_field(&q, t))
    } else {
        rk4_reference(&sys, &q0, t, None)
    }
}
