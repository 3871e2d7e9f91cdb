// SPDX-License-Identifier: Apache-2.0
//! Quadrature-free (series) SD-UTM solutions.
//!
//! Advection: Poisson-type weights in the log domain for the initial data and a
//! one-dimensional kernel integral for the boundary data. Heat/LS: discrete
//! sine (Dirichlet) or half-shifted cosine (Neumann) expansions with fused
//! damped boundary transforms.

use num_complex::Complex64 as C64;

use crate::dispersion::validate_problem;
use crate::error::{Error, Result};
use crate::problem::{
    BcKind, EquationKind, ProblemSpec, Side, SolutionField, StencilKind, TimeFunction,
};
use crate::quad::{integrate_vec, uniform_breaks, QuadOptions};
use crate::transforms::{
    boundary_combination, cosine_coefficients, damped_transform, sine_coefficients, SpectralData,
    TrigTable, DEFAULT_TOL,
};

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    pub tol: f64,
    /// Ghost-node closure for the second-order one-sided advection stencil.
    pub closure: O2Closure,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions { tol: DEFAULT_TOL, closure: O2Closure::CenteredPair }
    }
}

/// How the ghost value beyond x = L is tied to the boundary data for the
/// second-order forward advection stencil. The PDE gives q_x = v'/c and
/// q_xx = v''/c^2 at x = L; each pair below discretizes those two conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum O2Closure {
    /// Centered first and second differences about x = L.
    CenteredPair,
    /// Second-order forward first difference with a first-order forward second difference.
    ForwardPair,
    /// First-order forward difference for q_x only; O(h) accurate.
    FirstOrder,
}

impl O2Closure {
    /// (b0, b1, b2) with ghost g_1 = b0 v + b1 v' + b2 v''.
    pub fn ghost_coefficients(&self, h: f64, c: f64) -> (f64, f64, f64) {
        // Each row: coefficient of g_0, of g_1, of the other unknown, and of (v', v'') on the right.
        struct Row {
            g0: f64,
            g1: f64,
            other: f64,
            vd: f64,
            vdd: f64,
        }
        let (r1, r2) = match self {
            O2Closure::FirstOrder => return (1.0, h / c, 0.0),
            // (g_1 - g_{-1}) / 2h = v'/c ; (g_1 - 2 g_0 + g_{-1}) / h^2 = v''/c^2
            O2Closure::CenteredPair => (
                Row { g0: 0.0, g1: 1.0, other: -1.0, vd: 2.0 * h / c, vdd: 0.0 },
                Row { g0: -2.0, g1: 1.0, other: 1.0, vd: 0.0, vdd: h * h / (c * c) },
            ),
            // (-3 g_0 + 4 g_1 - g_2) / 2h = v'/c ; (g_0 - 2 g_1 + g_2) / h^2 = v''/c^2
            O2Closure::ForwardPair => (
                Row { g0: -3.0, g1: 4.0, other: -1.0, vd: 2.0 * h / c, vdd: 0.0 },
                Row { g0: 1.0, g1: -2.0, other: 1.0, vd: 0.0, vdd: h * h / (c * c) },
            ),
        };
        let det = r1.g1 * r2.other - r2.g1 * r1.other;
        let solve = |x1: f64, x2: f64| (r2.other * x1 - r1.other * x2) / det;
        (solve(-r1.g0, -r2.g0), solve(r1.vd, r2.vd), solve(r1.vdd, r2.vdd))
    }
}

fn ensure_accepted(spec: &ProblemSpec) -> Result<()> {
    let report = validate_problem(spec);
    if report.accepted {
        Ok(())
    } else {
        Err(Error::unsupported(
            report.reason,
            format!("{} with {} stencil and the given boundary conditions", spec.equation.name(), spec.stencil.name()),
        ))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("final time must be finite and nonnegative, got {t}")))
    }
}

/// ln(m!) for m = 0..=n.
pub fn log_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for m in 1..=n {
        acc += (m as f64).ln();
        out.push(acc);
    }
    out
}

/// ln m! - (m + 1/2) ln m + m - ln(2 pi)/2.
fn stirling_remainder(m: usize, lnfact: &[f64]) -> f64 {
    let x = m as f64;
    if m <= 15 {
        return lnfact[m] - (x + 0.5) * x.ln() + x - 0.5 * (2.0 * std::f64::consts::PI).ln();
    }
    let x2 = x * x;
    (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - 1.0 / (1188.0 * x2)) / x2) / x2) / x2) / x
}

/// x ln(x/mu) + mu - x without cancellation when x is close to mu.
fn deviance(x: f64, mu: f64) -> f64 {
    if (x - mu).abs() < 0.1 * (x + mu) {
        let v = (x - mu) / (x + mu);
        let v2 = v * v;
        let mut s = (x - mu) * v;
        let mut ej = 2.0 * x * v;
        for j in 1..1000 {
            ej *= v2;
            let next = s + ej / (2 * j + 1) as f64;
            if next == s {
                break;
            }
            s = next;
        }
        s
    } else {
        x * (x / mu).ln() + mu - x
    }
}

/// ln of the Poisson weight m ln(lambda) - ln m! - lambda, accurate near the mode
/// where the three terms nearly cancel.
fn ln_poisson(m: usize, lambda: f64, lnfact: &[f64]) -> f64 {
    if m == 0 {
        return -lambda;
    }
    let x = m as f64;
    -stirling_remainder(m, lnfact) - deviance(x, lambda) - 0.5 * (2.0 * std::f64::consts::PI * x).ln()
}

/// Poisson weights exp(m ln(lambda) - ln m! - lambda), m = 0..=n.
///
/// One exponential at the mode, then the ratio recurrence in both directions;
/// weights below the smallest normal double are flushed to zero.
pub fn poisson_weights(lambda: f64, lnfact: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|w| *w = 0.0);
    if lambda == 0.0 {
        out[0] = 1.0;
        return;
    }
    let last = out.len() - 1;
    let mode = (lambda.floor() as usize).min(last);
    let peak = ln_poisson(mode, lambda, lnfact);
    if peak < -700.0 {
        return;
    }
    let tiny = f64::MIN_POSITIVE;
    out[mode] = peak.exp();
    let mut w = out[mode];
    for (m, slot) in out.iter_mut().enumerate().skip(mode + 1) {
        w *= lambda / m as f64;
        if w < tiny {
            break;
        }
        *slot = w;
    }
    w = out[mode];
    for m in (0..mode).rev() {
        w *= (m + 1) as f64 / lambda;
        if w < tiny {
            break;
        }
        out[m] = w;
    }
}

/// Coefficients of z^m in exp(-3a) exp(4 a z - a z^2), m = 0..out.len().
pub fn forward_o2_weights(a: f64, out: &mut [f64]) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut offset = -3.0 * a;
    for (m, w) in out.iter_mut().enumerate() {
        if m > 0 {
            let next = (4.0 * a * cur - 2.0 * a * prev) / m as f64;
            prev = cur;
            cur = next;
            if cur.abs() > 1e250 {
                cur *= 1e-250;
                prev *= 1e-250;
                offset += 250.0 * std::f64::consts::LN_10;
            }
        }
        *w = if cur == 0.0 { 0.0 } else { cur * offset.exp() };
    }
}

fn kernel_breaks(c: f64, h: f64, t: f64) -> Vec<f64> {
    let panels = ((2.0 * c * t / h).ceil() as usize).clamp(4, 4000);
    uniform_breaks(0.0, t, panels)
}

/// Forward first-order advection, q_t = c q_x with Dirichlet data at x = L.
pub fn advection_forward_series(spec: &ProblemSpec, t: f64, opts: SeriesOptions) -> Result<SolutionField> {
    ensure_accepted(spec)?;
    check_time(t)?;
    if let EquationKind::AdvectionLeft { .. } = spec.equation {
        return advection_forward_series(&spec.reflected(), t, opts).map(SolutionField::reversed);
    }
    if spec.stencil != StencilKind::ForwardO1 {
        return Err(Error::unsupported("unsupported-pair", "expected the first-order forward stencil"));
    }
    let v = spec.require_boundary(Side::Right, BcKind::Dirichlet)?;
    let c = spec.advection_speed().unwrap_or(1.0);
    let grid = spec.grid;
    let (n, h) = (grid.interior(), grid.spacing());
    let lnfact = log_factorials(n + 1);

    let mut weights = vec![0.0; n + 1];
    poisson_weights(c * t / h, &lnfact, &mut weights);
    let mut values = vec![ZERO; n + 2];
    for (i, q) in values.iter_mut().enumerate().take(n + 1) {
        *q = (0..=n - i).map(|m| spec.initial[i + m] * weights[m]).sum();
    }

    if t > 0.0 {
        let rate = c / h;
        let mut kernel = vec![0.0; n + 1];
        let boundary = integrate_vec(
            |s, buf: &mut [C64]| {
                let vs = v.eval(t - s);
                poisson_weights(rate * s, &lnfact, &mut kernel);
                for (i, b) in buf.iter_mut().enumerate() {
                    *b = vs * (rate * kernel[n - i]);
                }
            },
            &kernel_breaks(c, h, t),
            n + 1,
            QuadOptions { abs_tol: opts.tol * 1e-3, rel_tol: opts.tol, max_depth: 30 },
        )?;
        for (q, b) in values.iter_mut().zip(&boundary.values) {
            *q += b;
        }
    }
    values[n + 1] = v.eval(t);
    Ok(SolutionField { grid, t, values })
}

/// Second-order one-sided advection with the derivative-data ghost closure.
pub fn advection_forward2_series(spec: &ProblemSpec, t: f64, opts: SeriesOptions) -> Result<SolutionField> {
    ensure_accepted(spec)?;
    check_time(t)?;
    if let EquationKind::AdvectionLeft { .. } = spec.equation {
        return advection_forward2_series(&spec.reflected(), t, opts).map(SolutionField::reversed);
    }
    if spec.stencil != StencilKind::ForwardO2 {
        return Err(Error::unsupported("unsupported-pair", "expected the second-order forward stencil"));
    }
    let v = spec.require_boundary(Side::Right, BcKind::Dirichlet)?;
    let vd = v.derivative(1)?;
    let (b0, b1, b2) = opts.closure.ghost_coefficients(spec.grid.spacing(), spec.advection_speed().unwrap_or(1.0));
    let vdd = if b2 != 0.0 { Some(v.derivative(2)?) } else { None };

    let c = spec.advection_speed().unwrap_or(1.0);
    let grid = spec.grid;
    let (n, h) = (grid.interior(), grid.spacing());

    let mut weights = vec![0.0; n + 1];
    forward_o2_weights(c * t / (2.0 * h), &mut weights);
    let mut values = vec![ZERO; n + 2];
    for (i, q) in values.iter_mut().enumerate().take(n + 1) {
        *q = (0..=n - i).map(|m| spec.initial[i + m] * weights[m]).sum();
    }

    if t > 0.0 {
        let mut kernel = vec![0.0; n + 1];
        let scale = c / (2.0 * h);
        let boundary = integrate_vec(
            |s, buf: &mut [C64]| {
                let tau = t - s;
                let vs = v.eval(tau);
                // Forcing of row N is (c/2h)[(4 - b0) v - b1 v' - b2 v''], of row N-1 it is -(c/2h) v.
                let mut last = (4.0 - b0) * vs - b1 * vd.eval(tau);
                if let Some(vdd) = &vdd {
                    last -= b2 * vdd.eval(tau);
                }
                forward_o2_weights(scale * s, &mut kernel);
                for (i, b) in buf.iter_mut().enumerate() {
                    let m = n - i;
                    let mut acc = last * kernel[m];
                    if m >= 1 {
                        acc -= vs * kernel[m - 1];
                    }
                    *b = acc * scale;
                }
            },
            &kernel_breaks(c, h, t),
            n + 1,
            QuadOptions { abs_tol: opts.tol * 1e-3, rel_tol: opts.tol, max_depth: 30 },
        )?;
        for (q, b) in values.iter_mut().zip(&boundary.values) {
            *q += b;
        }
    }
    values[n + 1] = v.eval(t);
    Ok(SolutionField { grid, t, values })
}

fn diffusive_factor(spec: &ProblemSpec, expected: EquationKind) -> Result<C64> {
    if spec.equation != expected || spec.stencil != StencilKind::CenteredO2 {
        return Err(Error::unsupported(
            "unsupported-pair",
            format!("expected {} with the centered second-order stencil", expected.name()),
        ));
    }
    Ok(spec.equation.diffusion_factor())
}

fn damped_all(v: &TimeFunction, w: &[C64], t: f64, tol: f64) -> Result<Vec<C64>> {
    w.iter().map(|&wl| damped_transform(v, wl, t, tol)).collect()
}

/// Spectral data of a Dirichlet problem (modes l = 0..=N+1; the end modes are inert).
pub fn dirichlet_spectral_data(spec: &ProblemSpec, t: f64, tol: f64) -> Result<SpectralData> {
    let kappa = spec.equation.diffusion_factor();
    let u = spec.require_boundary(Side::Left, BcKind::Dirichlet)?;
    let v = spec.require_boundary(Side::Right, BcKind::Dirichlet)?;
    let grid = spec.grid;
    let (n, h, l) = (grid.interior(), grid.spacing(), grid.length());
    let k: Vec<f64> = (0..n + 2).map(|m| std::f64::consts::PI * m as f64 / l).collect();
    let w: Vec<C64> = (0..n + 2)
        .map(|m| kappa * 2.0 * (1.0 - (std::f64::consts::PI * m as f64 / (n + 1) as f64).cos()) / (h * h))
        .collect();
    let b = sine_coefficients(&spec.initial, &grid);
    let damped_h = boundary_combination(&damped_all(u, &w, t, tol)?, &damped_all(v, &w, t, tol)?)?;
    Ok(SpectralData { k, w, b, damped_h })
}

/// Spectral data of a Neumann problem (modes l = 0..=N+1).
pub fn neumann_spectral_data(spec: &ProblemSpec, t: f64, tol: f64) -> Result<SpectralData> {
    let kappa = spec.equation.diffusion_factor();
    let u1 = spec.require_boundary(Side::Left, BcKind::Neumann)?;
    let v1 = spec.require_boundary(Side::Right, BcKind::Neumann)?;
    let grid = spec.grid;
    let (n, h, l) = (grid.interior(), grid.spacing(), grid.length());
    let k: Vec<f64> = (0..n + 2).map(|m| std::f64::consts::PI * m as f64 / (l + h)).collect();
    let w: Vec<C64> = (0..n + 2)
        .map(|m| kappa * 2.0 * (1.0 - (std::f64::consts::PI * m as f64 / (n + 2) as f64).cos()) / (h * h))
        .collect();
    let b = cosine_coefficients(&spec.initial, &grid);
    let damped_h = boundary_combination(&damped_all(u1, &w, t, tol)?, &damped_all(v1, &w, t, tol)?)?;
    Ok(SpectralData { k, w, b, damped_h })
}

fn dirichlet_series(spec: &ProblemSpec, t: f64, opts: SeriesOptions, expected: EquationKind) -> Result<SolutionField> {
    ensure_accepted(spec)?;
    check_time(t)?;
    let kappa = diffusive_factor(spec, expected)?;
    let data = dirichlet_spectral_data(spec, t, opts.tol)?;
    let grid = spec.grid;
    let (n, h, l) = (grid.interior(), grid.spacing(), grid.length());
    let table = TrigTable::new(2 * (n + 1));
    let weight = kappa * 2.0 / (l * h);

    let coef: Vec<C64> = (0..n + 2)
        .map(|m| {
            if m == 0 || m == n + 1 {
                return ZERO;
            }
            (-data.w[m] * t).exp() * data.b[m] + weight * table.sin[m] * data.damped_h[m]
        })
        .collect();
    let mut values = vec![ZERO; n + 2];
    for (i, q) in values.iter_mut().enumerate().take(n + 1).skip(1) {
        let mut acc = ZERO;
        let mut idx = 0usize;
        for cm in &coef[1..=n] {
            idx += i;
            if idx >= table.m {
                idx -= table.m;
            }
            acc += cm * table.sin[idx];
        }
        *q = acc;
    }
    values[0] = spec.left.as_ref().map(|b| b.data.eval(t)).unwrap_or(ZERO);
    values[n + 1] = spec.right.as_ref().map(|b| b.data.eval(t)).unwrap_or(ZERO);
    Ok(SolutionField { grid, t, values })
}

fn neumann_series(spec: &ProblemSpec, t: f64, opts: SeriesOptions, expected: EquationKind) -> Result<SolutionField> {
    ensure_accepted(spec)?;
    check_time(t)?;
    let kappa = diffusive_factor(spec, expected)?;
    let data = neumann_spectral_data(spec, t, opts.tol)?;
    let grid = spec.grid;
    let (n, h, l) = (grid.interior(), grid.spacing(), grid.length());
    let table = TrigTable::new(4 * (n + 2));
    let weight = kappa * 2.0 / l;

    let coef: Vec<C64> = (0..n + 2)
        .map(|m| {
            // cos(pi m h / (2 (L + h))) = cos(2 pi m / (4 (N + 2)))
            (-data.w[m] * t).exp() * data.b[m] - weight * table.cos[m] * data.damped_h[m]
        })
        .collect();
    let zero_mode = (data.b[0] * l - 2.0 * kappa * data.damped_h[0]) / (2.0 * (l + h));
    let outer = l / (l + h);
    let values = (0..n + 2)
        .map(|i| {
            let step = (2 * i + 1) % table.m;
            let mut idx = 0usize;
            let mut acc = ZERO;
            for cm in &coef[1..] {
                idx += step;
                if idx >= table.m {
                    idx -= table.m;
                }
                acc += cm * table.cos[idx];
            }
            acc * outer + zero_mode
        })
        .collect();
    Ok(SolutionField { grid, t, values })
}

pub fn heat_dirichlet_series(spec: &ProblemSpec, t: f64, opts: SeriesOptions) -> Result<SolutionField> {
    dirichlet_series(spec, t, opts, EquationKind::Heat)
}

pub fn heat_neumann_series(spec: &ProblemSpec, t: f64, opts: SeriesOptions) -> Result<SolutionField> {
    neumann_series(spec, t, opts, EquationKind::Heat)
}

pub fn ls_dirichlet_series(spec: &ProblemSpec, t: f64, opts: SeriesOptions) -> Result<SolutionField> {
    dirichlet_series(spec, t, opts, EquationKind::LinearSchrodinger)
}

pub fn ls_neumann_series(spec: &ProblemSpec, t: f64, opts: SeriesOptions) -> Result<SolutionField> {
    neumann_series(spec, t, opts, EquationKind::LinearSchrodinger)
}

/// Dispatch to the series solver matching the problem.
pub fn solve_series(spec: &ProblemSpec, t: f64, opts: SeriesOptions) -> Result<SolutionField> {
    ensure_accepted(spec)?;
    let kind = spec.left.as_ref().or(spec.right.as_ref()).map(|b| b.kind);
    match (spec.equation, spec.stencil, kind) {
        (EquationKind::AdvectionRight { .. } | EquationKind::AdvectionLeft { .. }, StencilKind::ForwardO1 | StencilKind::BackwardO1, _) => {
            advection_forward_series(spec, t, opts)
        }
        (EquationKind::AdvectionRight { .. } | EquationKind::AdvectionLeft { .. }, _, _) => {
            advection_forward2_series(spec, t, opts)
        }
        (EquationKind::Heat, StencilKind::CenteredO2, Some(BcKind::Dirichlet)) => heat_dirichlet_series(spec, t, opts),
        (EquationKind::Heat, StencilKind::CenteredO2, _) => heat_neumann_series(spec, t, opts),
        (EquationKind::LinearSchrodinger, _, Some(BcKind::Dirichlet)) => ls_dirichlet_series(spec, t, opts),
        (EquationKind::LinearSchrodinger, _, _) => ls_neumann_series(spec, t, opts),
        (EquationKind::Heat, _, _) => Err(Error::unsupported(
            "no-series-form",
            "the fourth-order heat stencil is solved by contour integration only",
        )),
    }
}
