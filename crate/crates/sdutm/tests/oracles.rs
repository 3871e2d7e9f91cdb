// SPDX-License-Identifier: Apache-2.0
mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::{dirichlet, max_diff, re, spec};
use nalgebra::DMatrix;
use sdutm::fd::assemble_system;
use sdutm::oracles::{
    advection_traveling_wave, expm, expm_solve, heat_dirichlet_example, rk4_reference, semidiscrete_reference,
    separation_series, OracleBoundary, SpaceFn,
};
use sdutm::problem::{EquationKind, StencilKind, TimeFunction};
use sdutm::{Error, C64};

fn heat_spec(n: usize, a: f64, b: f64) -> sdutm::problem::ProblemSpec {
    let (l, r) = dirichlet(a, b);
    spec(EquationKind::Heat, StencilKind::CenteredO2, n, |x| re((3.0 * x).cos() + x), l, r)
}

#[test]
fn expm_of_diagonal() {
    let d = [C64::new(1.0, 0.0), C64::new(-2.0, 0.0), C64::new(0.0, 1.0), C64::new(30.0, 0.0)];
    let a = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&d));
    let e = expm(&a).unwrap();
    for (i, z) in d.iter().enumerate() {
        let want = z.exp();
        assert!((e[(i, i)] - want).norm() < 1e-13 * want.norm(), "{i}: {}", e[(i, i)]);
    }
    assert_eq!(e[(0, 1)], C64::new(0.0, 0.0));
}

#[test]
fn expm_of_nilpotent() {
    let mut a = DMatrix::<C64>::zeros(3, 3);
    a[(0, 1)] = re(2.0);
    a[(1, 2)] = re(3.0);
    let e = expm(&a).unwrap();
    assert!((e[(0, 2)] - re(3.0)).norm() < 1e-14);
    assert!((e[(0, 1)] - re(2.0)).norm() < 1e-14);
    assert!((e[(2, 2)] - re(1.0)).norm() < 1e-14);
}

#[test]
fn travelling_wave() {
    let phi: SpaceFn = Arc::new(|x| re((x - 0.3).powi(2)));
    let v = TimeFunction::sine(1.0, 4.0);
    let exact = advection_traveling_wave(phi.clone(), v.clone(), 1.0, 1.0);
    for x in [0.0, 0.2, 0.9] {
        assert_eq!(exact.eval(x, 0.0), phi(x));
    }
    for t in [0.1, 0.7] {
        assert!((exact.eval(1.0, t) - v.eval(t)).norm() < 1e-15);
    }
    assert_eq!(exact.eval(0.5, 0.25), phi(0.75));
    // Past the characteristic from the corner the inflow data has arrived.
    assert!((exact.eval(0.5, 0.75) - v.eval(0.25)).norm() < 1e-15);
}

#[test]
fn heat_example_values() {
    let exact = heat_dirichlet_example();
    assert!((exact.eval(0.1, 0.0) - re(1.2)).norm() < 1e-15);
    assert!(exact.eval(0.0, 0.3).norm() < 1e-15);
    assert!((exact.eval(1.0, 0.3) - re(2.0)).norm() < 1e-14);
    let decay = (-25.0 * PI * PI * 0.01).exp();
    assert!((exact.eval(0.1, 0.01) - re(0.2 + decay)).norm() < 1e-15);
}

#[test]
fn separation_series_steady_state() {
    let phi: SpaceFn = Arc::new(|x| re(1.0 + 2.0 * x));
    let bc = OracleBoundary::Dirichlet { left: TimeFunction::constant(1.0), right: TimeFunction::constant(3.0) };
    let exact = separation_series(EquationKind::Heat, phi.clone(), bc, 1.0, 200).unwrap();
    for x in [0.0, 0.25, 0.6, 1.0] {
        for t in [0.0, 0.01, 1.0] {
            assert!((exact.eval(x, t) - phi(x)).norm() < 1e-12, "({x}, {t})");
        }
    }
}

#[test]
fn separation_series_single_mode() {
    let phi: SpaceFn = Arc::new(|x| re((PI * x).sin()));
    let zero = || OracleBoundary::Dirichlet { left: TimeFunction::zero(), right: TimeFunction::zero() };
    let heat = separation_series(EquationKind::Heat, phi.clone(), zero(), 1.0, 100).unwrap();
    let ls = separation_series(EquationKind::LinearSchrodinger, phi, zero(), 1.0, 100).unwrap();
    for x in [0.1, 0.5, 0.8] {
        let t = 0.05;
        let s = (PI * x).sin();
        assert!((heat.eval(x, t) - re(s * (-PI * PI * t).exp())).norm() < 1e-12);
        let want = C64::new(0.0, -PI * PI * t / 2.0).exp() * s;
        assert!((ls.eval(x, t) - want).norm() < 1e-12);
        assert!((ls.eval(x, 3.0).norm() - s).abs() < 1e-12);
    }
}

#[test]
fn neumann_series_is_converged() {
    let phi: SpaceFn = Arc::new(|x| re((x - 0.4).abs()));
    let bc = || OracleBoundary::Neumann { left: TimeFunction::constant(-1.0), right: TimeFunction::constant(1.0) };
    let a = separation_series(EquationKind::Heat, phi.clone(), bc(), 1.0, 400).unwrap();
    let b = separation_series(EquationKind::Heat, phi, bc(), 1.0, 800).unwrap();
    let diff = (a.eval(0.5, 0.005) - b.eval(0.5, 0.005)).norm();
    assert!(diff < 1e-10, "{diff:e}");
}

#[test]
fn oracles_satisfy_boundary_conditions() {
    let phi: SpaceFn = Arc::new(|x| re(x * x));
    let dir = OracleBoundary::Dirichlet {
        left: TimeFunction::polynomial(vec![re(0.0), re(2.0)]),
        right: TimeFunction::constant(1.0),
    };
    let exact = separation_series(EquationKind::Heat, phi.clone(), dir, 1.0, 400).unwrap();
    for t in [0.01, 0.1, 0.5] {
        assert!((exact.eval(0.0, t) - re(2.0 * t)).norm() < 1e-9, "t = {t}: {}", exact.eval(0.0, t));
        assert!((exact.eval(1.0, t) - re(1.0)).norm() < 1e-9);
    }

    let neu = OracleBoundary::Neumann { left: TimeFunction::constant(0.0), right: TimeFunction::constant(2.0) };
    let exact = separation_series(EquationKind::Heat, phi, neu, 1.0, 400).unwrap();
    let d = 1e-5;
    for t in [0.05, 0.2] {
        let left = (exact.eval(d, t) - exact.eval(0.0, t)) / d;
        let right = (exact.eval(1.0, t) - exact.eval(1.0 - d, t)) / d;
        assert!(left.norm() < 1e-3, "{left}");
        assert!((right - re(2.0)).norm() < 1e-3, "{right}");
    }
}

#[test]
fn separation_series_rejects_unsupported_inputs() {
    let phi: SpaceFn = Arc::new(|_| re(0.0));
    let bc = || OracleBoundary::Dirichlet { left: TimeFunction::zero(), right: TimeFunction::zero() };
    let adv = separation_series(EquationKind::AdvectionRight { c: 1.0 }, phi.clone(), bc(), 1.0, 10);
    assert!(matches!(adv, Err(Error::UnsupportedOracle(_))));
    let wavy = OracleBoundary::Dirichlet { left: TimeFunction::sine(1.0, 3.0), right: TimeFunction::zero() };
    assert!(matches!(separation_series(EquationKind::Heat, phi.clone(), wavy, 1.0, 10), Err(Error::UnsupportedOracle(_))));
    assert!(matches!(separation_series(EquationKind::Heat, phi, bc(), 1.0, 0), Err(Error::InvalidArgument(_))));
}

#[test]
fn expm_solve_single_unknown() {
    // N = 1, h = 1/2: q' = -8 q + 4 (a + b).
    let (a, b) = (1.0, 5.0);
    let s = heat_spec(1, a, b);
    let sys = assemble_system(&s).unwrap();
    let q0 = sys.initial_state(&s);
    let t: f64 = 0.07;
    let inf = (a + b) / 2.0;
    let want = inf + (q0[0].re - inf) * (-8.0 * t).exp();
    let got = expm_solve(&sys, &q0, t).unwrap();
    assert!((got[0] - re(want)).norm() < 1e-13);
}

#[test]
fn expm_solve_semigroup() {
    let s = heat_spec(30, 0.5, -1.0);
    let sys = assemble_system(&s).unwrap();
    let q0 = sys.initial_state(&s);
    let whole = expm_solve(&sys, &q0, 0.02).unwrap();
    let half = expm_solve(&sys, &q0, 0.01).unwrap();
    let twice = expm_solve(&sys, &half, 0.01).unwrap();
    assert!(max_diff(&whole, &twice) < 1e-12);
    let identity = expm_solve(&sys, &q0, 0.0).unwrap();
    assert!(max_diff(&identity, &q0) < 1e-15);
}

#[test]
fn expm_agrees_with_rk4() {
    let s = heat_spec(40, 0.0, 1.0);
    let sys = assemble_system(&s).unwrap();
    let q0 = sys.initial_state(&s);
    let a = expm_solve(&sys, &q0, 0.005).unwrap();
    let b = rk4_reference(&sys, &q0, 0.005, None).unwrap();
    assert!(max_diff(&a, &b.values[1..=sys.dim()]) < 1e-9);
}

#[test]
fn time_dependent_forcing_uses_rk4() {
    let l = Some(sdutm::problem::BoundaryCondition::dirichlet(TimeFunction::sine(1.0, 10.0)));
    let r = Some(sdutm::problem::BoundaryCondition::dirichlet(TimeFunction::zero()));
    let s = spec(EquationKind::Heat, StencilKind::CenteredO2, 20, |_| re(0.0), l, r);
    let sys = assemble_system(&s).unwrap();
    assert!(matches!(expm_solve(&sys, &sys.initial_state(&s), 0.1), Err(Error::UnsupportedOracle(_))));
    let field = semidiscrete_reference(&s, 0.1).unwrap();
    assert!((field.values[0] - re(1.0f64.sin())).norm() < 1e-15);
    assert!(field.values.iter().all(|z| z.re.is_finite()));
}

#[test]
fn expm_solve_dimension_limit() {
    let s = heat_spec(2000, 0.0, 0.0);
    let sys = assemble_system(&s).unwrap();
    let err = expm_solve(&sys, &sys.initial_state(&s), 0.01).unwrap_err();
    assert!(matches!(err, Error::ResourceLimit(_)), "{err}");
}
