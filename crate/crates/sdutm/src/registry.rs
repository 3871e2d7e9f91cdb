// SPDX-License-Identifier: Apache-2.0
//! Named reference problems with their exact solutions.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::oracles::{
    advection_traveling_wave, heat_dirichlet_example, separation_series, ExactSolution, OracleBoundary, SpaceFn,
};
use crate::problem::{
    make_grid, BoundaryCondition, EquationKind, Grid, ProblemSpec, ScalarFn, StencilKind, TimeFunction,
};

pub const NAMES: [&str; 5] = ["advec-sech", "heat-dirichlet", "heat-neumann", "ls-dirichlet", "ls-neumann"];

/// Modes used by the separation-of-variables oracles.
pub const ORACLE_MODES: usize = 400;

#[derive(Clone)]
pub struct NamedProblem {
    pub name: &'static str,
    pub description: &'static str,
    pub equation: EquationKind,
    pub stencil: StencilKind,
    pub length: f64,
    pub phi: SpaceFn,
    pub left: Option<BoundaryCondition>,
    pub right: Option<BoundaryCondition>,
    pub default_t: f64,
    pub default_h: f64,
    /// Step used by fixed-step finite-difference comparisons.
    pub default_dt: f64,
}

impl std::fmt::Debug for NamedProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NamedProblem").field("name", &self.name).finish_non_exhaustive()
    }
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

fn real(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> SpaceFn {
    Arc::new(move |x| C64::new(f(x), 0.0))
}

/// sech pulses a sech(a (x - x0)) and the value plus first two derivatives of
/// their sum along x = 1 + t.
fn sech_pair() -> (SpaceFn, TimeFunction) {
    const PULSES: [(f64, f64); 2] = [(200.0, 0.925), (40.0, 0.425)];
    let phi = real(|x| PULSES.iter().map(|&(a, x0)| sech(a * (x - x0))).sum());
    let derivative = |order: usize| -> ScalarFn {
        Arc::new(move |t: f64| {
            let v: f64 = PULSES
                .iter()
                .map(|&(a, x0)| {
                    let u = a * (1.0 + t - x0);
                    let (s, th) = (sech(u), u.tanh());
                    match order {
                        0 => s,
                        1 => -a * s * th,
                        _ => a * a * s * (th * th - s * s),
                    }
                })
                .sum();
            C64::new(v, 0.0)
        })
    };
    let v = TimeFunction::custom_with_derivatives((0..3).map(derivative).collect())
        .expect("three evaluators supplied");
    (phi, v)
}

pub fn lookup(name: &str) -> Result<NamedProblem> {
    let p = match name {
        "advec-sech" => {
            let (phi, v) = sech_pair();
            NamedProblem {
                name: "advec-sech",
                description: "q_t = q_x, two sech pulses, inflow q(1,t) = phi(1+t)",
                equation: EquationKind::AdvectionRight { c: 1.0 },
                stencil: StencilKind::ForwardO1,
                length: 1.0,
                phi,
                left: None,
                right: Some(BoundaryCondition::dirichlet(v)),
                default_t: 0.25,
                default_h: 0.005,
                default_dt: 2.5e-3,
            }
        }
        "heat-dirichlet" => NamedProblem {
            name: "heat-dirichlet",
            description: "q_t = q_xx, phi = 2x + sin(5 pi x), q(0,t) = 0, q(1,t) = 2",
            equation: EquationKind::Heat,
            stencil: StencilKind::CenteredO2,
            length: 1.0,
            phi: real(|x| 2.0 * x + (5.0 * PI * x).sin()),
            left: Some(BoundaryCondition::dirichlet(TimeFunction::constant(0.0))),
            right: Some(BoundaryCondition::dirichlet(TimeFunction::constant(2.0))),
            default_t: 0.01,
            default_h: 0.01,
            default_dt: 6.25e-4,
        },
        "heat-neumann" => NamedProblem {
            name: "heat-neumann",
            description: "q_t = q_xx, phi = 12x - 10x^2 + sin(20 pi x^3)/2, q_x(0,t) = 12, q_x(1,t) = 30 pi - 8",
            equation: EquationKind::Heat,
            stencil: StencilKind::CenteredO2,
            length: 1.0,
            phi: real(|x| 12.0 * x - 10.0 * x * x + 0.5 * (20.0 * PI * x * x * x).sin()),
            left: Some(BoundaryCondition::neumann(TimeFunction::constant(12.0))),
            right: Some(BoundaryCondition::neumann(TimeFunction::constant(30.0 * PI - 8.0))),
            default_t: 0.005,
            default_h: 0.01,
            default_dt: 6.25e-4,
        },
        "ls-dirichlet" => NamedProblem {
            name: "ls-dirichlet",
            description: "q_t = (i/2) q_xx, phi = 2(6+5i)x - 10(1+i)x^2 + sin(4 pi x^3)/2, q(0,t) = 0, q(1,t) = 2",
            equation: EquationKind::LinearSchrodinger,
            stencil: StencilKind::CenteredO2,
            length: 1.0,
            phi: Arc::new(|x| {
                C64::new(12.0, 10.0) * x - C64::new(10.0, 10.0) * (x * x) + 0.5 * (4.0 * PI * x * x * x).sin()
            }),
            left: Some(BoundaryCondition::dirichlet(TimeFunction::constant(0.0))),
            right: Some(BoundaryCondition::dirichlet(TimeFunction::constant(2.0))),
            default_t: 0.1,
            default_h: 0.01,
            default_dt: 3.90625e-4,
        },
        "ls-neumann" => NamedProblem {
            name: "ls-neumann",
            description: "q_t = (i/2) q_xx, phi = 12x - 10x^2 + sin(4 pi x^3)/2, q_x(0,t) = 12, q_x(1,t) = 6 pi - 8",
            equation: EquationKind::LinearSchrodinger,
            stencil: StencilKind::CenteredO2,
            length: 1.0,
            phi: real(|x| 12.0 * x - 10.0 * x * x + 0.5 * (4.0 * PI * x * x * x).sin()),
            left: Some(BoundaryCondition::neumann(TimeFunction::constant(12.0))),
            right: Some(BoundaryCondition::neumann(TimeFunction::constant(6.0 * PI - 8.0))),
            default_t: 0.2,
            default_h: 0.01,
            default_dt: 1.5625e-3,
        },
        other => {
            return Err(Error::InvalidProblem {
                code: "unknown-problem",
                message: format!("no problem named '{other}'; known: {}", NAMES.join(", ")),
            })
        }
    };
    Ok(p)
}

/// Interior node count for spacing h on [0, L]; h must divide L.
pub fn interior_for_spacing(length: f64, h: f64) -> Result<usize> {
    if !(h.is_finite() && h > 0.0 && h < length) {
        return Err(Error::InvalidArgument(format!("spacing must lie in (0, {length}), got {h}")));
    }
    let cells = length / h;
    let rounded = cells.round();
    if (cells - rounded).abs() > 1e-9 * cells {
        return Err(Error::InvalidArgument(format!("spacing {h} does not divide the interval length {length}")));
    }
    Ok(rounded as usize - 1)
}

impl NamedProblem {
    pub fn grid(&self, interior: usize) -> Result<Grid> {
        make_grid(self.length, interior)
    }

    /// The problem on N interior nodes.
    pub fn spec(&self, interior: usize) -> Result<ProblemSpec> {
        let grid = self.grid(interior)?;
        let initial = grid.nodes().into_iter().map(|x| (self.phi)(x)).collect();
        ProblemSpec::new(self.equation, self.stencil, grid, initial, self.left.clone(), self.right.clone())
    }

    pub fn spec_with_spacing(&self, h: f64) -> Result<ProblemSpec> {
        self.spec(interior_for_spacing(self.length, h)?)
    }

    /// Exact solution of the underlying PDE.
    pub fn oracle(&self) -> Result<ExactSolution> {
        match self.name {
            "advec-sech" => {
                let v = self.right.as_ref().expect("inflow data").data.clone();
                Ok(advection_traveling_wave(self.phi.clone(), v, 1.0, self.length))
            }
            "heat-dirichlet" => Ok(heat_dirichlet_example()),
            _ => {
                let side = |b: &Option<BoundaryCondition>| b.as_ref().expect("registry data").data.clone();
                let boundary = match self.left.as_ref().map(|b| b.kind) {
                    Some(crate::problem::BcKind::Neumann) => {
                        OracleBoundary::Neumann { left: side(&self.left), right: side(&self.right) }
                    }
                    _ => OracleBoundary::Dirichlet { left: side(&self.left), right: side(&self.right) },
                };
                separation_series(self.equation, self.phi.clone(), boundary, self.length, ORACLE_MODES)
            }
        }
    }
}
