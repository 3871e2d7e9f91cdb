// SPDX-License-Identifier: Apache-2.0
//! Lattice dispersion relations W(k) for q_n(t) = exp(i k n h - W t), their
//! symmetries, and the validation table of supported (equation, stencil, BC) triples.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::{BcKind, EquationKind, ProblemSpec, Side, StencilKind};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionModel {
    pub equation: EquationKind,
    pub stencil: StencilKind,
    pub h: f64,
}

/// Dispersion model for a pairing that has a lattice symbol.
pub fn make_dispersion(equation: EquationKind, stencil: StencilKind, h: f64) -> Result<DispersionModel> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidArgument(format!("mesh width must be positive, got {h}")));
    }
    use StencilKind::*;
    let ok = match equation {
        EquationKind::AdvectionRight { .. } => matches!(stencil, ForwardO1 | ForwardO2),
        EquationKind::AdvectionLeft { .. } => matches!(stencil, BackwardO1 | BackwardO2),
        EquationKind::Heat => matches!(stencil, CenteredO2 | CenteredO4),
        EquationKind::LinearSchrodinger => stencil == CenteredO2,
    };
    if !ok {
        return Err(Error::unsupported(
            "unsupported-pair",
            format!("{} has no implemented {} discretization", equation.name(), stencil.name()),
        ));
    }
    Ok(DispersionModel::new(equation, stencil, h))
}

/// A map k -> nu(k) with W(nu(k)) = W(k).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    Identity,
    Negation,
    /// exp(i nu h) = 4 - exp(i k h), principal logarithm.
    ForwardO2Partner,
    /// exp(-i nu h) = 4 - exp(-i k h), principal logarithm.
    BackwardO2Partner,
    /// The two roots of cos(nu h) = 8 - cos(k h) used by the fourth-order heat stencil.
    CenteredO4Plus,
    CenteredO4Minus,
}

/// Square root with its branch cut on the positive real axis (argument in [0, 2 pi)).
pub fn sqrt_cut_positive(z: C64) -> C64 {
    let mut arg = z.arg();
    if arg < 0.0 {
        arg += 2.0 * std::f64::consts::PI;
    }
    C64::from_polar(z.norm().sqrt(), 0.5 * arg)
}

impl Symmetry {
    pub fn apply(&self, k: C64, h: f64) -> C64 {
        let z = (I * k * h).exp();
        match self {
            Symmetry::Identity => k,
            Symmetry::Negation => -k,
            Symmetry::ForwardO2Partner => (4.0 - z).ln() / (I * h),
            Symmetry::BackwardO2Partner => -(4.0 - z.inv()).ln() / (I * h),
            Symmetry::CenteredO4Plus | Symmetry::CenteredO4Minus => {
                let b = 16.0 * z - z * z - 1.0;
                let root = sqrt_cut_positive(b * b - 4.0 * z * z);
                let root = if *self == Symmetry::CenteredO4Plus { root } else { -root };
                I / h * (z.inv() / 2.0 * (b + root)).ln()
            }
        }
    }
}

/// Sign of Re(-W(k)), i.e. growth (+), neutral (0) or decay (-) of the mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthSign {
    Decay,
    Neutral,
    Growth,
}

impl DispersionModel {
    pub fn new(equation: EquationKind, stencil: StencilKind, h: f64) -> Self {
        DispersionModel { equation, stencil, h }
    }

    pub fn for_problem(spec: &ProblemSpec) -> Self {
        Self::new(spec.equation, spec.stencil, spec.grid.spacing())
    }

    /// W(k). Pairings without a lattice symbol (e.g. heat with a one-sided
    /// stencil) return NaN; `validate_discretization` rejects them first.
    pub fn w(&self, k: C64) -> C64 {
        let h = self.h;
        let z = (I * k * h).exp();
        match (self.equation, self.stencil) {
            (EquationKind::AdvectionRight { c }, StencilKind::ForwardO1) => c * (1.0 - z) / h,
            (EquationKind::AdvectionRight { c }, StencilKind::ForwardO2) => {
                c * (3.0 - 4.0 * z + z * z) / (2.0 * h)
            }
            (EquationKind::AdvectionLeft { c }, StencilKind::BackwardO1) => c * (1.0 - z.inv()) / h,
            (EquationKind::AdvectionLeft { c }, StencilKind::BackwardO2) => {
                let w = z.inv();
                c * (3.0 - 4.0 * w + w * w) / (2.0 * h)
            }
            (EquationKind::Heat, StencilKind::CenteredO2) => 2.0 * (1.0 - (k * h).cos()) / (h * h),
            (EquationKind::LinearSchrodinger, StencilKind::CenteredO2) => {
                I * (1.0 - (k * h).cos()) / (h * h)
            }
            (EquationKind::Heat, StencilKind::CenteredO4) => {
                let c = (k * h).cos();
                (c - 1.0) * (c - 7.0) / (3.0 * h * h)
            }
            _ => C64::new(f64::NAN, f64::NAN),
        }
    }

    /// The PDE symbol the lattice relation approximates as h -> 0.
    pub fn continuum_w(&self, k: C64) -> C64 {
        match self.equation {
            EquationKind::AdvectionRight { c } => -I * c * k,
            EquationKind::AdvectionLeft { c } => I * c * k,
            EquationKind::Heat => k * k,
            EquationKind::LinearSchrodinger => I * k * k / 2.0,
        }
    }

    /// Nontrivial symmetries of W, identity first.
    pub fn symmetries(&self) -> Vec<Symmetry> {
        let mut out = vec![Symmetry::Identity];
        match (self.equation, self.stencil) {
            (EquationKind::AdvectionRight { .. }, StencilKind::ForwardO2) => {
                out.push(Symmetry::ForwardO2Partner)
            }
            (EquationKind::AdvectionLeft { .. }, StencilKind::BackwardO2) => {
                out.push(Symmetry::BackwardO2Partner)
            }
            (EquationKind::Heat | EquationKind::LinearSchrodinger, StencilKind::CenteredO2) => {
                out.push(Symmetry::Negation)
            }
            (EquationKind::Heat, StencilKind::CenteredO4) => out.extend([
                Symmetry::Negation,
                Symmetry::CenteredO4Plus,
                Symmetry::CenteredO4Minus,
            ]),
            _ => {}
        }
        out
    }

    pub fn growth_sign(&self, k: C64) -> GrowthSign {
        let w = self.w(k);
        let re = -w.re;
        let tol = 8.0 * f64::EPSILON * w.norm();
        if re > tol {
            GrowthSign::Growth
        } else if re < -tol {
            GrowthSign::Decay
        } else {
            GrowthSign::Neutral
        }
    }
}

/// Outcome of checking a discretization against the supported table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub accepted: bool,
    pub reason: &'static str,
}

impl ValidationReport {
    fn ok() -> Self {
        ValidationReport { accepted: true, reason: "accepted" }
    }

    fn reject(reason: &'static str) -> Self {
        ValidationReport { accepted: false, reason }
    }
}

/// Decide whether (equation, stencil, boundary kinds) admits a closed system.
///
/// `left`/`right` are the kinds of boundary data supplied (None = absent).
pub fn validate_discretization(
    equation: EquationKind,
    stencil: StencilKind,
    left: Option<BcKind>,
    right: Option<BcKind>,
) -> ValidationReport {
    use StencilKind::*;
    match equation {
        EquationKind::AdvectionRight { .. } | EquationKind::AdvectionLeft { .. } => {
            let (upwind_ok, inflow, outflow) = match equation {
                EquationKind::AdvectionRight { .. } => {
                    (matches!(stencil, ForwardO1 | ForwardO2), right, left)
                }
                _ => (matches!(stencil, BackwardO1 | BackwardO2), left, right),
            };
            if matches!(stencil, CenteredO2 | CenteredO4) {
                // A centered stencil needs data at the outflow end, which the PDE does not supply.
                return ValidationReport::reject("no-closing-relation");
            }
            if !upwind_ok {
                return ValidationReport::reject("downwind-stencil");
            }
            if outflow.is_some() {
                return ValidationReport::reject("outflow-boundary-data");
            }
            match inflow {
                Some(BcKind::Dirichlet) => ValidationReport::ok(),
                Some(BcKind::Neumann) => ValidationReport::reject("inflow-requires-dirichlet"),
                None => ValidationReport::reject("missing-boundary-data"),
            }
        }
        EquationKind::Heat | EquationKind::LinearSchrodinger => {
            let stencil_ok = match equation {
                EquationKind::Heat => matches!(stencil, CenteredO2 | CenteredO4),
                _ => stencil == CenteredO2,
            };
            if !stencil_ok {
                return ValidationReport::reject("unsupported-stencil");
            }
            match (left, right) {
                (Some(a), Some(b)) if a == b => ValidationReport::ok(),
                (Some(_), Some(_)) => ValidationReport::reject("mixed-boundary-kinds"),
                _ => ValidationReport::reject("missing-boundary-data"),
            }
        }
    }
}

pub fn validate_problem(spec: &ProblemSpec) -> ValidationReport {
    validate_discretization(
        spec.equation,
        spec.stencil,
        spec.boundary(Side::Left).map(|b| b.kind),
        spec.boundary(Side::Right).map(|b| b.kind),
    )
}
