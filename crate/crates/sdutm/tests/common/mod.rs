// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

use sdutm::problem::{sample_initial, BoundaryCondition, EquationKind, ProblemSpec, StencilKind, TimeFunction};
use sdutm::{make_grid, C64};

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn spec(
    equation: EquationKind,
    stencil: StencilKind,
    n: usize,
    phi: impl Fn(f64) -> C64,
    left: Option<BoundaryCondition>,
    right: Option<BoundaryCondition>,
) -> ProblemSpec {
    let grid = make_grid(1.0, n).unwrap();
    ProblemSpec::new(equation, stencil, grid, sample_initial(&grid, phi), left, right).unwrap()
}

pub fn dirichlet(a: f64, b: f64) -> (Option<BoundaryCondition>, Option<BoundaryCondition>) {
    (
        Some(BoundaryCondition::dirichlet(TimeFunction::constant(a))),
        Some(BoundaryCondition::dirichlet(TimeFunction::constant(b))),
    )
}

pub fn neumann(a: f64, b: f64) -> (Option<BoundaryCondition>, Option<BoundaryCondition>) {
    (
        Some(BoundaryCondition::neumann(TimeFunction::constant(a))),
        Some(BoundaryCondition::neumann(TimeFunction::constant(b))),
    )
}

/// Right-inflow advection problem on [0, 1] with speed c.
pub fn advection(stencil: StencilKind, n: usize, c: f64, phi: impl Fn(f64) -> C64, v: TimeFunction) -> ProblemSpec {
    spec(EquationKind::AdvectionRight { c }, stencil, n, phi, None, Some(BoundaryCondition::dirichlet(v)))
}

pub fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
