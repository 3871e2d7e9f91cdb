// SPDX-License-Identifier: Apache-2.0
//! Integral (contour) representations of the Dirichlet heat, Schrodinger and
//! fourth-order heat solutions.
//!
//! With E = exp(2ikL) and both paths running from Re k = -pi/h to +pi/h,
//!
//!   q_n(T) = (1/2pi) int_{-pi/h}^{pi/h} e^{iknh} e^{-WT} qhat(k,0) dk
//!          + (1/2pi) int_{P+} e^{iknh} [e^{-WT}(qhat(-k,0) - E qhat(k,0))/(E-1) + B(k)] dk
//!          - (1/2pi) int_{P-} e^{iknh} [e^{-WT}(qhat(-k,0) - qhat(k,0))/(E-1) + B(k)] dk,
//!
//!   B(k) = [s(k)(F0 - e^{ikL} G0) - d(k)((h F1 + h^3 F2/12) - e^{ikL}(h G1 + h^3 G2/12))]/(E-1),
//!
//! where Fj, Gj are damped time transforms of the j-th time derivative of the
//! left/right data, s(k) is the stencil's boundary weight and d(k) is nonzero
//! only for the fourth-order closure. The integrands are 2pi/h periodic, so the
//! vertical sides at Re k = +-pi/h cancel and any path of this shape that
//! stays off the real axis gives the same value; the paths below are chosen
//! to keep exp(-WT) small and slowly varying.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dispersion::{validate_problem, DispersionModel};
use crate::error::{Error, Result};
use crate::problem::{BcKind, EquationKind, ProblemSpec, Side, SolutionField, StencilKind, TimeFunction};
use crate::quad::{integrate_vec, QuadOptions, QuadOutput};
use crate::transforms::damped_transform;

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HalfPlane {
    Upper,
    Lower,
}

type PathMap = Arc<dyn Fn(f64) -> (C64, C64) + Send + Sync>;

/// One smooth piece of a path, parameterized over s in [0, 1].
#[derive(Clone)]
pub struct Segment {
    map: PathMap,
    pub label: &'static str,
}

impl std::fmt::Debug for Segment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (a, _) = (self.map)(0.0);
        let (b, _) = (self.map)(1.0);
        write!(f, "Segment({}: {a} -> {b})", self.label)
    }
}

impl Segment {
    fn line(a: C64, b: C64, label: &'static str) -> Self {
        Segment { map: Arc::new(move |s| (a + (b - a) * s, b - a)), label }
    }

    fn curve(label: &'static str, f: impl Fn(f64) -> (C64, C64) + Send + Sync + 'static) -> Self {
        Segment { map: Arc::new(f), label }
    }

    /// k(s) and dk/ds.
    pub fn eval(&self, s: f64) -> (C64, C64) {
        (self.map)(s)
    }
}

#[derive(Debug, Clone)]
pub struct ContourPath {
    pub segments: Vec<Segment>,
    pub half_plane: HalfPlane,
    pub delta: f64,
}

impl ContourPath {
    pub fn start(&self) -> C64 {
        self.segments[0].eval(0.0).0
    }

    pub fn end(&self) -> C64 {
        self.segments[self.segments.len() - 1].eval(1.0).0
    }

    /// `per_segment` points from every segment, endpoints included.
    pub fn sample(&self, per_segment: usize) -> Vec<C64> {
        let m = per_segment.max(2);
        self.segments
            .iter()
            .flat_map(|seg| (0..m).map(move |i| seg.eval(i as f64 / (m - 1) as f64).0))
            .collect()
    }

    /// Smallest distance from the sampled path to the real points pi l / length.
    pub fn min_distance_to_poles(&self, length: f64, h: f64) -> f64 {
        let spacing = PI / length;
        self.sample(400)
            .into_iter()
            .map(|k| {
                let nearest = (k.re / spacing).round().clamp(-(PI / h / spacing).ceil(), (PI / h / spacing).ceil());
                (k - C64::new(nearest * spacing, 0.0)).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn mirrored(&self, half_plane: HalfPlane, conj: bool) -> ContourPath {
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|seg| {
                let seg = seg.clone();
                if conj {
                    // Conjugation keeps the left-to-right order, so undo the reversal below.
                    Segment::curve(seg.label, move |s| {
                        let (k, dk) = seg.eval(s);
                        (k.conj(), dk.conj())
                    })
                } else {
                    Segment::curve(seg.label, move |s| {
                        let (k, dk) = seg.eval(1.0 - s);
                        (-k, dk)
                    })
                }
            })
            .collect::<Vec<_>>();
        let segments = if conj { segments.into_iter().rev().collect() } else { segments };
        ContourPath { segments, half_plane, delta: self.delta }
    }
}

/// Tuning knobs for the path builder and the quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourOptions {
    pub tol: f64,
    /// Offset from the real axis near the origin; defaults to pi h / (4L).
    pub delta: Option<f64>,
    /// Highest Im k reached by the path; defaults from the decay of exp(-WT).
    pub height: Option<f64>,
    /// arg W followed by the heat branches.
    pub theta: f64,
}

impl Default for ContourOptions {
    fn default() -> Self {
        ContourOptions { tol: 1e-10, delta: None, height: None, theta: PI / 4.0 }
    }
}

/// Principal acos. The library form -i ln(c + i sqrt(1 - c^2)) cancels for large |c|;
/// the two roots c +- i sqrt(1 - c^2) have product 1, so take the log of the larger.
fn acos_stable(c: C64) -> C64 {
    let s = I * (1.0 - c * c).sqrt();
    let (up, down) = (c + s, c - s);
    if up.norm() >= down.norm() {
        -I * up.ln()
    } else {
        I * down.ln()
    }
}

/// Right branch k(r) of the curve arg W(k) = theta for the heat stencils, with dk/dr.
pub fn heat_branch(stencil: StencilKind, h: f64, theta: f64, r: f64) -> (C64, C64) {
    let e = C64::from_polar(1.0, theta);
    let w = e * r;
    let (c, dc_dw) = match stencil {
        StencilKind::CenteredO4 => {
            let root = (9.0 + 3.0 * h * h * w).sqrt();
            (4.0 - root, -1.5 * h * h / root)
        }
        _ => (1.0 - 0.5 * h * h * w, C64::new(-0.5 * h * h, 0.0)),
    };
    let k = acos_stable(c) / h;
    let dk_dc = -1.0 / (h * (k * h).sin());
    (k, dk_dc * dc_dw * e)
}

fn bisect_height(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    // Geometric bisection on r for an increasing f.
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.0 + 1e-13 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Path in the given half plane for a heat or Schrodinger centered model.
///
/// `t` sets the default height (decay of exp(-WT) to about e^-40 for heat);
/// `length` bounds the height so that exp(2ikL) stays representable, and the
/// Schrodinger height is further limited to 2 pi / h.
pub fn build_contour(
    model: &DispersionModel,
    half_plane: HalfPlane,
    delta: f64,
    height: Option<f64>,
    t: f64,
    length: f64,
    theta: f64,
) -> Result<ContourPath> {
    let h = model.h;
    if !(delta > 0.0 && delta < PI / (4.0 * h)) {
        return Err(Error::InvalidArgument(format!(
            "contour offset must lie in (0, pi/(4h)) = (0, {:.6e}), got {delta}",
            PI / (4.0 * h)
        )));
    }
    let mut max_height = 300.0 / length;
    if model.equation == EquationKind::LinearSchrodinger {
        // Along the imaginary axis the Schrodinger integrand decays only like
        // e^{-Rh} while the phase of e^{-WT} grows like cosh(Rh) T/h^2; higher
        // paths cost exponentially more quadrature and gain nothing.
        max_height = max_height.min(2.0 * PI / h);
    }
    if let Some(r) = height {
        if !(r > 2.0 * delta && r <= max_height) {
            return Err(Error::InvalidArgument(format!(
                "contour height must lie in (2 delta, {max_height:.3e}], got {r}"
            )));
        }
    }
    let upper = match (model.equation, model.stencil) {
        (EquationKind::Heat, StencilKind::CenteredO2 | StencilKind::CenteredO4) => {
            if !(theta > 0.0 && theta < PI / 2.0) {
                return Err(Error::InvalidArgument(format!("branch angle must lie in (0, pi/2), got {theta}")));
            }
            heat_upper(model.stencil, h, delta, height, t, max_height, theta)?
        }
        (EquationKind::LinearSchrodinger, StencilKind::CenteredO2) => ls_upper(h, delta, height, max_height),
        _ => {
            return Err(Error::unsupported(
                "no-contour-form",
                format!("no contour representation for {} with {}", model.equation.name(), model.stencil.name()),
            ))
        }
    };
    Ok(match (half_plane, model.equation) {
        (HalfPlane::Upper, _) => upper,
        (HalfPlane::Lower, EquationKind::Heat) => upper.mirrored(HalfPlane::Lower, true),
        (HalfPlane::Lower, _) => upper.mirrored(HalfPlane::Lower, false),
    })
}

fn heat_upper(
    stencil: StencilKind,
    h: f64,
    delta: f64,
    height: Option<f64>,
    t: f64,
    max_height: f64,
    theta: f64,
) -> Result<ContourPath> {
    let branch = move |r: f64| heat_branch(stencil, h, theta, r);
    let im_at = move |r: f64| branch(r).0.im;
    // Upper end: either the requested height, or where Re(W) T reaches 40,
    // kept at least a few offsets above the junction and below the overflow cap.
    let mut r_hi = 1.0 / (h * h);
    while im_at(r_hi) < max_height && r_hi < 1e300 {
        r_hi *= 4.0;
    }
    let r_lo = 1e-300_f64.max(delta * delta * 1e-6);
    let r_top = match height {
        Some(y) => bisect_height(im_at, y, r_lo, r_hi),
        None => {
            let r_decay = if t > 0.0 { 40.0 / (t * theta.cos()) } else { f64::INFINITY };
            let r_cap = bisect_height(im_at, max_height, r_lo, r_hi);
            let r_min = bisect_height(im_at, 4.0 * delta, r_lo, r_hi);
            r_decay.min(r_cap).max(r_min)
        }
    };
    let r_join = bisect_height(im_at, delta, r_lo, r_top);
    let (k_top, _) = branch(r_top);
    let (k_join, _) = branch(r_join);
    let y = k_top.im;
    let log_ratio = (r_top / r_join).ln();

    let segments = vec![
        Segment::line(C64::new(-PI / h, y), -k_top.conj(), "cap-left"),
        Segment::curve("branch-left", move |s| {
            let r = r_top * (-log_ratio * s).exp();
            let (k, dk) = branch(r);
            (-k.conj(), -dk.conj() * (-log_ratio * r))
        }),
        Segment::line(-k_join.conj(), k_join, "junction"),
        Segment::curve("branch-right", move |s| {
            let r = r_join * (log_ratio * s).exp();
            let (k, dk) = branch(r);
            (k, dk * (log_ratio * r))
        }),
        Segment::line(k_top, C64::new(PI / h, y), "cap-right"),
    ];
    Ok(ContourPath { segments, half_plane: HalfPlane::Upper, delta })
}

fn ls_upper(h: f64, delta: f64, height: Option<f64>, max_height: f64) -> ContourPath {
    let top = height.unwrap_or((PI / h).min(max_height));
    let lambda = 4.0 * h / PI;
    let a_end = PI / h;
    let beta = move |a: f64| delta * (0.5 + 0.5 * (-lambda * a).exp());
    let beta_end = beta(a_end);
    let segments = vec![
        Segment::line(C64::new(-PI / h, beta_end), C64::new(0.0, top), "slant"),
        Segment::line(C64::new(0.0, top), C64::new(0.0, delta), "imaginary-axis"),
        Segment::curve("tail", move |s| {
            let a = s * a_end;
            let k = C64::new(a, beta(a));
            let dk = C64::new(1.0, -0.5 * delta * lambda * (-lambda * a).exp()) * a_end;
            (k, dk)
        }),
    ];
    ContourPath { segments, half_plane: HalfPlane::Upper, delta }
}

/// Default pair of paths for a problem at time T.
pub fn default_paths(spec: &ProblemSpec, t: f64, opts: &ContourOptions) -> Result<(ContourPath, ContourPath)> {
    let model = DispersionModel::for_problem(spec);
    let (h, l) = (spec.grid.spacing(), spec.grid.length());
    let delta = opts.delta.unwrap_or(PI * h / (4.0 * l));
    let up = build_contour(&model, HalfPlane::Upper, delta, opts.height, t, l, opts.theta)?;
    let down = build_contour(&model, HalfPlane::Lower, delta, opts.height, t, l, opts.theta)?;
    Ok((up, down))
}

struct BoundaryData {
    left: Vec<TimeFunction>,
    right: Vec<TimeFunction>,
}

struct Integrand<'a> {
    model: DispersionModel,
    spec: &'a ProblemSpec,
    t: f64,
    tol: f64,
    bd: BoundaryData,
    fourth_order: bool,
}

impl<'a> Integrand<'a> {
    fn qhat(&self, k: C64) -> C64 {
        let n = self.spec.grid.interior();
        crate::transforms::forward_fourier_sum(&self.spec.initial, k, 1..n + 1, self.model.h)
    }

    fn sigma(&self, k: C64) -> C64 {
        let h = self.model.h;
        let kappa = self.spec.equation.diffusion_factor();
        if self.fourth_order {
            (28.0 * I * (k * h).sin() - 2.0 * I * (2.0 * k * h).sin()) / (12.0 * h)
        } else {
            kappa * 2.0 * I * (k * h).sin() / h
        }
    }

    /// e^{-WT} times the bracketed boundary term, excluding the 1/(E-1) factor.
    fn boundary(&self, k: C64, w: C64) -> Result<C64> {
        let (h, l, t) = (self.model.h, self.spec.grid.length(), self.t);
        let eikl = (I * k * l).exp();
        let d = |f: &TimeFunction| damped_transform(f, w, t, self.tol * 1e-2);
        let mut out = self.sigma(k) * (d(&self.bd.left[0])? - eikl * d(&self.bd.right[0])?);
        if self.fourth_order {
            let dk = I * (k * h).sin() / 6.0;
            let lhs = d(&self.bd.left[1])? * h + d(&self.bd.left[2])? * (h * h * h / 12.0);
            let rhs = d(&self.bd.right[1])? * h + d(&self.bd.right[2])? * (h * h * h / 12.0);
            out -= dk * (lhs - eikl * rhs);
        }
        Ok(out)
    }

    /// Writes (1/2pi) e^{iknh} G(k) dk/ds into `buf` for n = 1..=N.
    fn path_values(&self, k: C64, dk: C64, upper: bool, buf: &mut [C64]) -> Result<()> {
        let (h, l, t) = (self.model.h, self.spec.grid.length(), self.t);
        let w = self.model.w(k);
        let decay = (-w * t).exp();
        let e2 = (2.0 * I * k * l).exp();
        let qm = self.qhat(-k);
        let qp = self.qhat(k);
        let ic = if upper { qm - e2 * qp } else { qm - qp };
        // 1/(E - 1), written in terms of 1/E below the axis where |E|^2 overflows.
        let pole = if k.im < 0.0 {
            let inv = (-2.0 * I * k * l).exp();
            inv / (1.0 - inv)
        } else {
            1.0 / (e2 - 1.0)
        };
        let g = (decay * ic + self.boundary(k, w)?) * pole * dk / (2.0 * PI);
        let z = (I * k * h).exp();
        let mut zn = z;
        for b in buf.iter_mut() {
            *b = zn * g;
            zn *= z;
        }
        Ok(())
    }
}

/// Phase variation of exp(-WT + iknh) along a segment, used to size the initial panels.
fn panels_for(seg: &Segment, model: &DispersionModel, t: f64, nmax: f64) -> usize {
    let samples = 512;
    let mut total = 0.0;
    // Oscillation of exp(-WT) only matters where that factor has not decayed away.
    let phase = |s: f64| {
        let (k, _) = seg.eval(s);
        let wt = model.w(k) * t;
        (wt.re < 60.0, -wt.im, k.re * nmax * model.h)
    };
    let mut prev = phase(0.0);
    for i in 1..=samples {
        let p = phase(i as f64 / samples as f64);
        if p.0 || prev.0 {
            total += (p.1 - prev.1).abs();
        }
        total += (p.2 - prev.2).abs();
        prev = p;
    }
    ((total / PI).ceil() as usize + 4).min(20_000)
}

fn integrate_segment(
    seg: &Segment,
    integrand: &Integrand<'_>,
    upper: bool,
    dim: usize,
    opts: QuadOptions,
) -> Result<QuadOutput> {
    let panels = panels_for(seg, &integrand.model, integrand.t, dim as f64);
    let breaks = crate::quad::uniform_breaks(0.0, 1.0, panels);
    let mut failure = None;
    let out = integrate_vec(
        |s, buf: &mut [C64]| {
            let (k, dk) = seg.eval(s);
            if let Err(e) = integrand.path_values(k, dk, upper, buf) {
                failure.get_or_insert(e);
                buf.iter_mut().for_each(|b| *b = ZERO);
            }
        },
        &breaks,
        dim,
        opts,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(out)
}

/// Evaluate the integral representation on the given paths.
pub fn dirichlet_integral_on(
    spec: &ProblemSpec,
    t: f64,
    upper: &ContourPath,
    lower: &ContourPath,
    tol: f64,
) -> Result<SolutionField> {
    let report = validate_problem(spec);
    if !report.accepted {
        return Err(Error::unsupported(report.reason, "problem rejected by validation"));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("final time must be nonnegative, got {t}")));
    }
    let fourth_order = match (spec.equation, spec.stencil) {
        (EquationKind::Heat | EquationKind::LinearSchrodinger, StencilKind::CenteredO2) => false,
        (EquationKind::Heat, StencilKind::CenteredO4) => true,
        _ => {
            return Err(Error::unsupported(
                "no-contour-form",
                "contour solvers cover heat and Schrodinger with centered stencils",
            ))
        }
    };
    let u = spec.require_boundary(Side::Left, BcKind::Dirichlet)?;
    let v = spec.require_boundary(Side::Right, BcKind::Dirichlet)?;
    let derivs = if fourth_order { 3 } else { 1 };
    let bd = BoundaryData {
        left: (0..derivs).map(|d| u.derivative(d)).collect::<Result<_>>()?,
        right: (0..derivs).map(|d| v.derivative(d)).collect::<Result<_>>()?,
    };
    let grid = spec.grid;
    let n = grid.interior();
    let mut values = vec![ZERO; n + 2];
    values[0] = u.eval(t);
    values[n + 1] = v.eval(t);
    if t == 0.0 {
        values[1..=n].copy_from_slice(&spec.initial[1..=n]);
        return Ok(SolutionField { grid, t, values });
    }

    let integrand = Integrand { model: DispersionModel::for_problem(spec), spec, t, tol, bd, fourth_order };
    let opts = QuadOptions { abs_tol: tol * 1e-2, rel_tol: tol, max_depth: 30 };
    let h = grid.spacing();

    // Initial-data integral along the real line.
    let wmax = (0..=64)
        .map(|i| integrand.model.w(C64::new(PI / h * i as f64 / 64.0, 0.0)).norm())
        .fold(0.0, f64::max);
    let panels = ((2 * n + 2) as f64).max((wmax * t / PI).ceil() * 2.0).min(20_000.0) as usize;
    let real = integrate_vec(
        |k, buf: &mut [C64]| {
            let kc = C64::new(k, 0.0);
            let g = (-integrand.model.w(kc) * t).exp() * integrand.qhat(kc) / (2.0 * PI);
            let z = (I * kc * h).exp();
            let mut zn = z;
            for b in buf.iter_mut() {
                *b = zn * g;
                zn *= z;
            }
        },
        &crate::quad::uniform_breaks(-PI / h, PI / h, panels),
        n,
        opts,
    )?;
    for (q, r) in values[1..=n].iter_mut().zip(&real.values) {
        *q += r;
    }
    for (path, sign, is_upper) in [(upper, 1.0, true), (lower, -1.0, false)] {
        for seg in &path.segments {
            let out = integrate_segment(seg, &integrand, is_upper, n, opts)?;
            for (q, r) in values[1..=n].iter_mut().zip(&out.values) {
                *q += r * sign;
            }
        }
    }
    Ok(SolutionField { grid, t, values })
}

fn dirichlet_integral(spec: &ProblemSpec, t: f64, opts: &ContourOptions, expected: (EquationKind, StencilKind)) -> Result<SolutionField> {
    if (spec.equation, spec.stencil) != expected {
        return Err(Error::unsupported(
            "unsupported-pair",
            format!("expected {} with {}", expected.0.name(), expected.1.name()),
        ));
    }
    let (up, down) = default_paths(spec, t, opts)?;
    dirichlet_integral_on(spec, t, &up, &down, opts.tol)
}

pub fn heat_dirichlet_integral(spec: &ProblemSpec, t: f64, opts: &ContourOptions) -> Result<SolutionField> {
    dirichlet_integral(spec, t, opts, (EquationKind::Heat, StencilKind::CenteredO2))
}

pub fn ls_dirichlet_integral(spec: &ProblemSpec, t: f64, opts: &ContourOptions) -> Result<SolutionField> {
    dirichlet_integral(spec, t, opts, (EquationKind::LinearSchrodinger, StencilKind::CenteredO2))
}

pub fn heat4_dirichlet_integral(spec: &ProblemSpec, t: f64, opts: &ContourOptions) -> Result<SolutionField> {
    dirichlet_integral(spec, t, opts, (EquationKind::Heat, StencilKind::CenteredO4))
}

/// Dispatch on the problem's equation and stencil.
pub fn solve_integral(spec: &ProblemSpec, t: f64, opts: &ContourOptions) -> Result<SolutionField> {
    let (up, down) = default_paths(spec, t, opts)?;
    dirichlet_integral_on(spec, t, &up, &down, opts.tol)
}
