// SPDX-License-Identifier: Apache-2.0
//! Discrete Fourier sums, time transforms of boundary data and the spectral
//! coefficients consumed by the series solvers.

use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::problem::{ExpPolyTerm, Grid, TimeFunction};
use crate::quad::{integrate, QuadOptions};

pub const DEFAULT_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);

/// h * sum_{n in range} exp(-i k n h) values[n], by Horner's rule.
pub fn forward_fourier_sum(values: &[C64], k: C64, range: Range<usize>, h: f64) -> C64 {
    if range.is_empty() {
        return ZERO;
    }
    let z = (C64::new(0.0, -1.0) * k * h).exp();
    let mut acc = ZERO;
    for n in range.clone().rev() {
        acc = acc * z + values[n];
    }
    acc * z.powu(range.start as u32) * h
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeTransformValue {
    pub w: C64,
    pub t: f64,
    /// int_0^T exp(W t) v(t) dt
    pub value: C64,
}

/// J_i(b) = int_0^T s^i exp(-b s) ds for i = 0..=deg.
fn moment_integrals(b: C64, t: f64, deg: usize) -> Vec<C64> {
    let bt = b * t;
    let mut out = Vec::with_capacity(deg + 1);
    if bt.norm() <= deg as f64 + 2.0 {
        // Power series in (-b s), integrated term by term.
        for i in 0..=deg {
            let mut term = C64::new(t.powi(i as i32 + 1), 0.0);
            let mut sum = term / (i as f64 + 1.0);
            for m in 1..200 {
                term *= -bt / m as f64;
                let add = term / (m + i + 1) as f64;
                sum += add;
                if add.norm() <= 1e-17 * sum.norm() {
                    break;
                }
            }
            out.push(sum);
        }
    } else {
        let e = (-bt).exp();
        let mut prev = (1.0 - e) / b;
        out.push(prev);
        for i in 1..=deg {
            prev = (prev * i as f64 - e * t.powi(i as i32)) / b;
            out.push(prev);
        }
    }
    out
}

fn poly_derivatives_at(poly: &[C64], t: f64) -> Vec<C64> {
    // Taylor coefficients of p around t: d_i = p^{(i)}(t) / i!.
    let n = poly.len();
    let mut out = vec![ZERO; n];
    for (j, &c) in poly.iter().enumerate() {
        let mut binom = 1.0;
        for i in 0..=j {
            out[i] += c * binom * t.powi((j - i) as i32);
            binom *= (j - i) as f64 / (i + 1) as f64;
        }
    }
    out
}

fn damped_term(term: &ExpPolyTerm, w: C64, t: f64) -> C64 {
    let deg = term.degree();
    let taylor = poly_derivatives_at(&term.poly[..=deg], t);
    let j = moment_integrals(w + term.rate, t, deg);
    let mut acc = ZERO;
    for i in 0..=deg {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc += taylor[i] * j[i] * sign;
    }
    acc * (term.rate * t).exp()
}

fn undamped_term(term: &ExpPolyTerm, w: C64, t: f64) -> C64 {
    let deg = term.degree();
    let j = moment_integrals(-(w + term.rate), t, deg);
    (0..=deg).map(|i| term.poly[i] * j[i]).sum()
}

/// Breakpoints for quadrature of exp(-W (T - t)) v(t) on [0, T]: oscillation
/// resolved to at most pi radians per panel, and geometric grading towards
/// t = T when the kernel is a thin boundary layer.
pub(crate) fn kernel_breaks(w: C64, t: f64) -> Result<Vec<f64>> {
    let panels = ((w.im.abs() * t / PI).ceil() as usize).max(1);
    if panels > 2_000_000 {
        return Err(Error::ResourceLimit(format!(
            "time transform with |Im W| T = {:.3e} needs too many panels",
            w.im.abs() * t
        )));
    }
    let mut breaks: Vec<f64> = (0..=panels).map(|i| t * i as f64 / panels as f64).collect();
    if w.re * t > 4.0 {
        let mut width = 1.0 / w.re;
        while width < t {
            breaks.push(t - width);
            width *= 2.0;
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
    }
    Ok(breaks)
}

fn quad_options(tol: f64) -> QuadOptions {
    QuadOptions { abs_tol: tol, rel_tol: tol, max_depth: 40 }
}

/// int_0^T exp(-W (T - t)) v(t) dt, the overflow-free product exp(-W T) * F(W, T).
pub fn damped_transform(v: &TimeFunction, w: C64, t: f64, tol: f64) -> Result<C64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("final time must be nonnegative, got {t}")));
    }
    if t == 0.0 {
        return Ok(ZERO);
    }
    if let Some(terms) = v.terms() {
        return Ok(terms.iter().map(|term| damped_term(term, w, t)).sum());
    }
    let breaks = kernel_breaks(w, t)?;
    let (value, _) = integrate(|s| (-w * (t - s)).exp() * v.eval(s), &breaks, quad_options(tol))?;
    Ok(value)
}

/// int_0^T exp(W t) v(t) dt.
pub fn time_transform(v: &TimeFunction, w: C64, t: f64, tol: f64) -> Result<TimeTransformValue> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("final time must be nonnegative, got {t}")));
    }
    let value = if t == 0.0 {
        ZERO
    } else if let Some(terms) = v.terms() {
        terms.iter().map(|term| undamped_term(term, w, t)).sum()
    } else {
        let breaks = kernel_breaks(-w, t)?;
        integrate(|s| (w * s).exp() * v.eval(s), &breaks, quad_options(tol))?.0
    };
    Ok(TimeTransformValue { w, t, value })
}

/// Table of sin/cos(2 pi j / m), j = 0..m, for exact-index trigonometric sums.
pub(crate) struct TrigTable {
    pub m: usize,
    pub sin: Vec<f64>,
    pub cos: Vec<f64>,
}

impl TrigTable {
    pub fn new(m: usize) -> Self {
        let (sin, cos) = (0..m)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / m as f64;
                a.sin_cos()
            })
            .unzip();
        TrigTable { m, sin, cos }
    }
}

/// Dirichlet sine coefficients b_l = (2h/L) sum_{m=1}^{N} sin(pi l m h / L) phi_m,
/// returned for l = 0..=N+1 (the end entries are zero).
pub fn sine_coefficients(initial: &[C64], grid: &Grid) -> Vec<C64> {
    let n = grid.interior();
    let table = TrigTable::new(2 * (n + 1));
    let scale = 2.0 * grid.spacing() / grid.length();
    let mut b = vec![ZERO; n + 2];
    for (l, bl) in b.iter_mut().enumerate().take(n + 1).skip(1) {
        let mut acc = ZERO;
        let mut idx = 0usize;
        for phi in &initial[1..=n] {
            idx += l;
            if idx >= table.m {
                idx -= table.m;
            }
            acc += phi * table.sin[idx];
        }
        *bl = acc * scale;
    }
    b
}

/// Neumann coefficients b_l = (2h/L) sum_{m=0}^{N+1} cos(pi l (m + 1/2) h/(L+h)) phi_m, l = 0..=N+1.
pub fn cosine_coefficients(initial: &[C64], grid: &Grid) -> Vec<C64> {
    let n = grid.interior();
    let table = TrigTable::new(4 * (n + 2));
    let scale = 2.0 * grid.spacing() / grid.length();
    (0..n + 2)
        .map(|l| {
            let step = (2 * l) % table.m;
            let mut idx = l % table.m;
            let mut acc = ZERO;
            for phi in &initial[..n + 2] {
                acc += phi * table.cos[idx];
                idx += step;
                if idx >= table.m {
                    idx -= table.m;
                }
            }
            acc * scale
        })
        .collect()
}

/// H_l = left_l + (-1)^{l+1} right_l.
pub fn boundary_combination(left: &[C64], right: &[C64]) -> Result<Vec<C64>> {
    if left.len() != right.len() {
        return Err(Error::InvalidArgument(format!(
            "boundary transform arrays differ in length ({} vs {})",
            left.len(),
            right.len()
        )));
    }
    Ok(left
        .iter()
        .zip(right)
        .enumerate()
        .map(|(l, (a, b))| if l % 2 == 0 { a - b } else { a + b })
        .collect())
}

/// Mode data for the Dirichlet and Neumann series.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub k: Vec<f64>,
    pub w: Vec<C64>,
    pub b: Vec<C64>,
    /// exp(-W_l T) H(W_l, T), fused.
    pub damped_h: Vec<C64>,
}
