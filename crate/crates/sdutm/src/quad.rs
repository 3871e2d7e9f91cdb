// SPDX-License-Identifier: Apache-2.0
//! Adaptive Gauss-Kronrod (7/15) quadrature for vector-valued complex integrands.
//!
//! All components share the nodes, so a whole column of nodal values q_n can be
//! integrated at once. Panels are bisected until each one's share of the
//! tolerance is met; the error estimate is the max-norm of the Kronrod/Gauss
//! difference, which is pessimistic but robust for oscillatory integrands.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

// Tabulated to 33 digits; rounding to f64 happens at compile time.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-14, rel_tol: 1e-10, max_depth: 40 }
    }
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        QuadOptions { abs_tol: tol * 1e-4, rel_tol: tol, ..Default::default() }
    }
}

#[derive(Debug, Clone)]
pub struct QuadOutput {
    pub values: Vec<C64>,
    pub error: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    depth: u32,
    kronrod: Vec<C64>,
    error: f64,
}

struct Rule<F> {
    f: F,
    dim: usize,
    evals: usize,
    fbuf: Vec<C64>,
    gauss: Vec<C64>,
}

impl<F: FnMut(f64, &mut [C64])> Rule<F> {
    fn panel(&mut self, a: f64, b: f64, depth: u32) -> Panel {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let mut kronrod = vec![C64::new(0.0, 0.0); self.dim];
        self.gauss.iter_mut().for_each(|g| *g = C64::new(0.0, 0.0));
        for (j, &x) in XGK.iter().enumerate() {
            let nodes: &[f64] = if j == 7 { &[0.0] } else { &[-1.0, 1.0] };
            for &sgn in nodes {
                (self.f)(c + sgn * r * x, &mut self.fbuf);
                self.evals += 1;
                for (k, v) in self.fbuf.iter().enumerate() {
                    kronrod[k] += *v * WGK[j];
                    if j % 2 == 1 {
                        self.gauss[k] += *v * WG[j / 2];
                    }
                }
            }
        }
        let mut error = 0.0f64;
        for k in 0..self.dim {
            kronrod[k] *= r;
            error = error.max((kronrod[k] - self.gauss[k] * r).norm());
        }
        Panel { a, b, depth, kronrod, error }
    }
}

/// Integrate a `dim`-vector valued function over [breaks[0], breaks[last]],
/// starting from the panels delimited by `breaks` (sorted, at least two entries).
pub fn integrate_vec<F>(f: F, breaks: &[f64], dim: usize, opts: QuadOptions) -> Result<QuadOutput>
where
    F: FnMut(f64, &mut [C64]),
{
    if breaks.len() < 2 {
        return Err(Error::InvalidArgument("quadrature needs at least one panel".into()));
    }
    let lo = breaks[0];
    let hi = breaks[breaks.len() - 1];
    let mut values = vec![C64::new(0.0, 0.0); dim];
    if dim == 0 || hi == lo {
        return Ok(QuadOutput { values, error: 0.0, evaluations: 0 });
    }
    let span = (hi - lo).abs();
    let mut rule = Rule {
        f,
        dim,
        evals: 0,
        fbuf: vec![C64::new(0.0, 0.0); dim],
        gauss: vec![C64::new(0.0, 0.0); dim],
    };

    let mut stack: Vec<Panel> = breaks
        .windows(2)
        .filter(|w| w[1] != w[0])
        .map(|w| rule.panel(w[0], w[1], 0))
        .collect();
    let mut scale = 0.0f64;
    for k in 0..dim {
        let s: C64 = stack.iter().map(|p| p.kronrod[k]).sum();
        scale = scale.max(s.norm());
    }
    let target = opts.abs_tol.max(opts.rel_tol * scale);
    stack.reverse();

    let mut total_error = 0.0;
    let mut exhausted = false;
    while let Some(p) = stack.pop() {
        let share = target * ((p.b - p.a).abs() / span);
        let non_finite = p.kronrod.iter().any(|z| !(z.re.is_finite() && z.im.is_finite()));
        if non_finite {
            return Err(Error::NumericalFailure("non-finite integrand value in quadrature".into()));
        }
        if p.error <= share || p.depth >= opts.max_depth {
            if p.error > share {
                exhausted = true;
            }
            total_error += p.error;
            for (v, k) in values.iter_mut().zip(&p.kronrod) {
                *v += k;
            }
            continue;
        }
        let m = 0.5 * (p.a + p.b);
        let right = rule.panel(m, p.b, p.depth + 1);
        let left = rule.panel(p.a, m, p.depth + 1);
        stack.push(right);
        stack.push(left);
    }
    if exhausted && total_error > target {
        return Err(Error::AccuracyFailure { achieved: total_error });
    }
    Ok(QuadOutput { values, error: total_error, evaluations: rule.evals })
}

/// Scalar convenience wrapper.
pub fn integrate<F>(mut f: F, breaks: &[f64], opts: QuadOptions) -> Result<(C64, f64)>
where
    F: FnMut(f64) -> C64,
{
    let out = integrate_vec(|x, buf: &mut [C64]| buf[0] = f(x), breaks, 1, opts)?;
    Ok((out.values[0], out.error))
}

/// `panels + 1` equally spaced breakpoints on [a, b].
pub fn uniform_breaks(a: f64, b: f64, panels: usize) -> Vec<f64> {
    let panels = panels.max(1);
    (0..=panels)
        .map(|i| if i == panels { b } else { a + (b - a) * i as f64 / panels as f64 })
        .collect()
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm1) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}
