// SPDX-License-Identifier: Apache-2.0
//! Semi-discrete unified transform solvers for linear evolution equations on
//! a finite interval.
//!
//! The method-of-lines system obtained from a spatial stencil is solved exactly
//! in time, either as a finite series or as a contour integral in the Fourier
//! variable. Finite-difference time steppers and independent oracles are
//! included for comparison and verification.

// Parallel-array index loops read better than zipped iterators in the kernels,
// and `!(x > 0.0)` is the NaN-rejecting form used for argument checks.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod contour;
pub mod dispersion;
pub mod error;
pub mod fd;
pub mod fit;
pub mod harness;
pub mod oracles;
pub mod problem;
pub mod quad;
pub mod registry;
pub mod series;
pub mod smalltime;
pub mod transforms;

pub use num_complex::Complex64 as C64;

pub use contour::{build_contour, solve_integral, ContourOptions, ContourPath, HalfPlane};
pub use dispersion::{make_dispersion, validate_discretization, validate_problem, DispersionModel};
pub use error::{Error, Result};
pub use fd::{assemble_system, solve_fd, OdeSystem, Stepper, StepperKind};
pub use problem::{
    make_grid, BcKind, BoundaryCondition, EquationKind, Grid, ProblemSpec, Side, SolutionField, StencilKind,
    TimeFunction,
};
pub use series::{solve_series, O2Closure, SeriesOptions};
