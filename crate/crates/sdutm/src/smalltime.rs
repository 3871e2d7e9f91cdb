// SPDX-License-Identifier: Apache-2.0
//! Small-time-increment expansion of the forward first-order advection
//! solution, for split-step use.
//!
//! q_n(t0 + tau) = exp(-c tau/h) sum_m (c tau/h)^m phi_{n+m}/m! + sum_l K_l(n) tau^l + O(tau^{order+1}),
//!
//! with K_l(n) = c/(2 pi l!) sum_{j<l} (-1)^{l-1-j} I_{l-1-j}(n) v^{(j)}(t0), which is
//! the coefficient of tau^l in the Taylor expansion of the boundary integral.

use num_complex::Complex64 as C64;

use crate::dispersion::validate_problem;
use crate::error::{Error, Result};
use crate::problem::{BcKind, Diagnostic, EquationKind, ProblemSpec, Side, SolutionField, StencilKind};
use crate::series::{log_factorials, poisson_weights};

const ZERO: C64 = C64::new(0.0, 0.0);
pub const MAX_ORDER: usize = 3;

/// I_m(n) = int_{-pi/h}^{pi/h} e^{ik(n-N)h} W^m dk for W = c(1 - e^{ikh})/h.
pub fn moment_integral(m: usize, n: usize, interior: usize, h: f64, c: f64) -> f64 {
    assert!(n <= interior, "node index {n} beyond N = {interior}");
    let gap = interior - n;
    if m < gap {
        return 0.0;
    }
    // m!/((m-gap)! gap!) is the binomial coefficient; (-1)^gap from (1 - z)^m.
    let mut binom = 1.0;
    for i in 0..gap {
        binom *= (m - i) as f64 / (i + 1) as f64;
    }
    let sign = if gap.is_multiple_of(2) { 1.0 } else { -1.0 };
    2.0 * std::f64::consts::PI / h * sign * binom * (c / h).powi(m as i32)
}

/// Retained coefficients of a small-time expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallTimeExpansion {
    pub order: usize,
    pub t0: f64,
    /// `coefficients[l - 1][n]` is K_l(n) for n = 0..=N.
    pub coefficients: Vec<Vec<C64>>,
}

fn check_spec(spec: &ProblemSpec, order: usize) -> Result<f64> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(Error::InvalidArgument(format!("expansion order must lie in 1..={MAX_ORDER}, got {order}")));
    }
    let report = validate_problem(spec);
    if !report.accepted {
        return Err(Error::unsupported(report.reason, "problem rejected by validation"));
    }
    match (spec.equation, spec.stencil) {
        (EquationKind::AdvectionRight { c }, StencilKind::ForwardO1) => Ok(c),
        _ => Err(Error::unsupported(
            "no-small-time-form",
            "the small-time expansion covers the first-order forward advection stencil",
        )),
    }
}

pub fn smalltime_coefficients(spec: &ProblemSpec, t0: f64, order: usize) -> Result<SmallTimeExpansion> {
    let c = check_spec(spec, order)?;
    let v = spec.require_boundary(Side::Right, BcKind::Dirichlet)?;
    let derivs = (0..order).map(|j| v.derivative_at(j, t0)).collect::<Result<Vec<_>>>()?;
    let (n, h) = (spec.grid.interior(), spec.grid.spacing());
    let scale = c / (2.0 * std::f64::consts::PI);
    let mut fact = 1.0;
    let coefficients = (1..=order)
        .map(|l| {
            fact *= l as f64;
            (0..=n)
                .map(|node| {
                    let mut acc = ZERO;
                    for (j, dv) in derivs.iter().enumerate().take(l) {
                        let m = l - 1 - j;
                        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                        acc += dv * (sign * moment_integral(m, node, n, h, c));
                    }
                    acc * (scale / fact)
                })
                .collect()
        })
        .collect();
    Ok(SmallTimeExpansion { order, t0, coefficients })
}

/// Solution at t0 + tau from the values in `spec.initial` taken at t0.
pub fn smalltime_solve(spec: &ProblemSpec, t0: f64, tau: f64, order: usize) -> Result<(SolutionField, Vec<Diagnostic>)> {
    let c = check_spec(spec, order)?;
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("time increment must be nonnegative, got {tau}")));
    }
    let expansion = smalltime_coefficients(spec, t0, order)?;
    let grid = spec.grid;
    let (n, h) = (grid.interior(), grid.spacing());
    let mut diagnostics = Vec::new();
    let courant = c * tau / h;
    if courant > 1.0 {
        diagnostics.push(Diagnostic {
            code: "large-increment",
            message: format!("c tau / h = {courant:.3} exceeds 1; the truncated expansion may be inaccurate"),
        });
    }

    let lnfact = log_factorials(n + 1);
    let mut weights = vec![0.0; n + 1];
    poisson_weights(courant, &lnfact, &mut weights);
    let mut values = vec![ZERO; n + 2];
    for (i, q) in values.iter_mut().enumerate().take(n + 1) {
        let mut acc: C64 = (0..=n - i).map(|m| spec.initial[i + m] * weights[m]).sum();
        let mut p = 1.0;
        for k in &expansion.coefficients {
            p *= tau;
            acc += k[i] * p;
        }
        *q = acc;
    }
    let v = spec.require_boundary(Side::Right, BcKind::Dirichlet)?;
    values[n + 1] = v.eval(t0 + tau);
    Ok((SolutionField { grid, t: t0 + tau, values }, diagnostics))
}
