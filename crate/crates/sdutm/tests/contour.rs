// SPDX-License-Identifier: Apache-2.0
mod common;

use std::f64::consts::PI;

use common::{dirichlet, re, spec};
use proptest::prelude::*;
use sdutm::contour::{
    build_contour, default_paths, dirichlet_integral_on, heat4_dirichlet_integral, heat_branch,
    heat_dirichlet_integral, ls_dirichlet_integral, solve_integral, ContourOptions, HalfPlane,
};
use sdutm::dispersion::DispersionModel;
use sdutm::oracles::semidiscrete_reference;
use sdutm::problem::{BoundaryCondition, EquationKind, ProblemSpec, StencilKind, TimeFunction};
use sdutm::registry::lookup;
use sdutm::series::{solve_series, SeriesOptions};
use sdutm::{Error, C64};

fn opts() -> ContourOptions {
    ContourOptions::default()
}

fn centered_models(h: f64) -> Vec<DispersionModel> {
    vec![
        DispersionModel::new(EquationKind::Heat, StencilKind::CenteredO2, h),
        DispersionModel::new(EquationKind::Heat, StencilKind::CenteredO4, h),
        DispersionModel::new(EquationKind::LinearSchrodinger, StencilKind::CenteredO2, h),
    ]
}

#[test]
fn heat_branch_has_constant_argument() {
    for stencil in [StencilKind::CenteredO2, StencilKind::CenteredO4] {
        let h = 0.05;
        let model = DispersionModel::new(EquationKind::Heat, stencil, h);
        for r in [1e-3, 1.0, 50.0, 1e4, 1e7] {
            let (k, _) = heat_branch(stencil, h, PI / 4.0, r);
            let w = model.w(k);
            assert!((w - C64::from_polar(r, PI / 4.0)).norm() < 1e-12 * (r + 1.0), "{stencil:?} r={r}: {w}");
            assert!(k.im > 0.0 && k.re > 0.0);
        }
    }
}

#[test]
fn branch_derivative_matches_difference() {
    let h = 0.1;
    let r = 37.0;
    let (_, dk) = heat_branch(StencilKind::CenteredO4, h, PI / 4.0, r);
    let e = 1e-6 * r;
    let fd = (heat_branch(StencilKind::CenteredO4, h, PI / 4.0, r + e).0
        - heat_branch(StencilKind::CenteredO4, h, PI / 4.0, r - e).0)
        / (2.0 * e);
    assert!((dk - fd).norm() < 1e-6 * dk.norm());
}

#[test]
fn endpoints_and_half_planes() {
    let h = 0.02;
    for m in centered_models(h) {
        for half in [HalfPlane::Upper, HalfPlane::Lower] {
            let p = build_contour(&m, half, PI * h / 4.0, None, 0.01, 1.0, PI / 4.0).unwrap();
            assert!((p.start().re + PI / h).abs() < 1e-12 / h, "{:?} {half:?}", m.stencil);
            assert!((p.end().re - PI / h).abs() < 1e-12 / h, "{:?} {half:?}", m.stencil);
            let sign = if half == HalfPlane::Upper { 1.0 } else { -1.0 };
            assert!(p.sample(200).iter().all(|k| sign * k.im > 0.0));
            // Segments join up.
            for w in p.segments.windows(2) {
                assert!((w[0].eval(1.0).0 - w[1].eval(0.0).0).norm() < 1e-12 / h);
            }
        }
    }
}

#[test]
fn paths_clear_the_poles() {
    let n = 49;
    let h = 1.0 / (n as f64 + 1.0);
    let delta = PI / (8.0 * h * (n as f64 + 1.0));
    for m in centered_models(h) {
        for half in [HalfPlane::Upper, HalfPlane::Lower] {
            let p = build_contour(&m, half, delta, None, 0.01, 1.0, PI / 4.0).unwrap();
            assert!(p.min_distance_to_poles(1.0, h) >= delta / 2.0, "{:?} {half:?}", m.equation);
        }
    }
}

#[test]
fn schrodinger_tail_hugs_the_axis() {
    let h = 0.01;
    let delta = 0.05;
    let m = DispersionModel::new(EquationKind::LinearSchrodinger, StencilKind::CenteredO2, h);
    let p = build_contour(&m, HalfPlane::Upper, delta, None, 0.1, 1.0, PI / 4.0).unwrap();
    let tail = p.segments.iter().find(|s| s.label == "tail").unwrap();
    let pts: Vec<C64> = (0..=500).map(|i| tail.eval(i as f64 / 500.0).0).collect();
    assert!(pts.iter().all(|k| k.im <= delta && k.im > 0.0));
    assert!(pts.windows(2).all(|w| w[1].im <= w[0].im && w[1].re > w[0].re));
}

#[test]
fn rejects_bad_parameters() {
    let h = 0.1;
    let m = DispersionModel::new(EquationKind::Heat, StencilKind::CenteredO2, h);
    for delta in [0.0, -1.0, PI / (4.0 * h), 100.0] {
        let r = build_contour(&m, HalfPlane::Upper, delta, None, 0.01, 1.0, PI / 4.0);
        assert!(matches!(r, Err(Error::InvalidArgument(_))), "delta {delta}");
    }
    for height in [0.01, 1e6] {
        let r = build_contour(&m, HalfPlane::Upper, 0.05, Some(height), 0.01, 1.0, PI / 4.0);
        assert!(matches!(r, Err(Error::InvalidArgument(_))), "height {height}");
    }
    // Schrodinger paths stop at 2 pi / h, well below the overflow cap here.
    let ls = DispersionModel::new(EquationKind::LinearSchrodinger, StencilKind::CenteredO2, h);
    assert!(build_contour(&ls, HalfPlane::Upper, 0.05, Some(2.0 * PI / h), 0.01, 1.0, 0.0).is_ok());
    let r = build_contour(&ls, HalfPlane::Upper, 0.05, Some(2.1 * PI / h), 0.01, 1.0, 0.0);
    assert!(matches!(r, Err(Error::InvalidArgument(_))));
    let adv = DispersionModel::new(EquationKind::AdvectionRight { c: 1.0 }, StencilKind::ForwardO1, h);
    let r = build_contour(&adv, HalfPlane::Upper, 0.05, None, 0.01, 1.0, PI / 4.0);
    assert_eq!(r.unwrap_err().reason(), Some("no-contour-form"));
}

#[test]
fn zero_data_gives_zero() {
    let (l, r) = dirichlet(0.0, 0.0);
    for (eq, st) in [
        (EquationKind::Heat, StencilKind::CenteredO2),
        (EquationKind::LinearSchrodinger, StencilKind::CenteredO2),
        (EquationKind::Heat, StencilKind::CenteredO4),
    ] {
        let s = spec(eq, st, 9, |_| re(0.0), l.clone(), r.clone());
        let f = solve_integral(&s, 0.01, &opts()).unwrap();
        assert!(f.values.iter().all(|z| z.norm() < 1e-14));
    }
}

#[test]
fn heat_matches_series_and_reference() {
    let p = lookup("heat-dirichlet").unwrap();
    let s = p.spec(9).unwrap();
    let f = heat_dirichlet_integral(&s, 0.01, &opts()).unwrap();
    assert!(f.max_abs_diff(&solve_series(&s, 0.01, SeriesOptions::default()).unwrap()) < 1e-6);
    assert!(f.max_abs_diff(&semidiscrete_reference(&s, 0.01).unwrap()) < 1e-6);
}

#[test]
fn schrodinger_matches_series() {
    let p = lookup("ls-dirichlet").unwrap();
    let s = p.spec(9).unwrap();
    let f = ls_dirichlet_integral(&s, 0.05, &opts()).unwrap();
    assert!(f.max_abs_diff(&solve_series(&s, 0.05, SeriesOptions::default()).unwrap()) < 1e-6);
}

#[test]
fn schrodinger_small_time_is_real() {
    let (l, r) = dirichlet(0.0, 0.0);
    let s = spec(EquationKind::LinearSchrodinger, StencilKind::CenteredO2, 9, |x| re((PI * x).sin()), l, r);
    let f = ls_dirichlet_integral(&s, 1e-10, &opts()).unwrap();
    assert!(f.max_imag() < 1e-8, "{}", f.max_imag());
    assert!(f.max_error(|x| re((PI * x).sin())) < 1e-8);
}

#[test]
fn fourth_order_matches_reference() {
    let (l, r) = dirichlet(0.0, 0.0);
    let s = spec(EquationKind::Heat, StencilKind::CenteredO4, 9, |x| re((PI * x).sin()), l, r);
    let f = heat4_dirichlet_integral(&s, 0.01, &opts()).unwrap();
    assert!(f.max_abs_diff(&semidiscrete_reference(&s, 0.01).unwrap()) < 1e-6);
}

#[test]
fn fourth_order_time_dependent_data() {
    let left = TimeFunction::sine(0.5, 7.0);
    let right = TimeFunction::polynomial(vec![re(1.0), re(-3.0), re(2.0)]);
    let s = spec(
        EquationKind::Heat,
        StencilKind::CenteredO4,
        14,
        |x| re(x * x * (1.0 - x) + 1.0 * x),
        Some(BoundaryCondition::dirichlet(left)),
        Some(BoundaryCondition::dirichlet(right)),
    );
    let f = heat4_dirichlet_integral(&s, 0.05, &opts()).unwrap();
    let r = semidiscrete_reference(&s, 0.05).unwrap();
    assert!(f.max_abs_diff(&r) < 1e-8, "{}", f.max_abs_diff(&r));
}

#[test]
fn fourth_order_needs_derivatives() {
    let s = spec(
        EquationKind::Heat,
        StencilKind::CenteredO4,
        9,
        |_| re(0.0),
        Some(BoundaryCondition::dirichlet(TimeFunction::custom(re))),
        Some(BoundaryCondition::dirichlet(TimeFunction::zero())),
    );
    assert_eq!(heat4_dirichlet_integral(&s, 0.01, &opts()).unwrap_err().reason(), Some("derivatives-required"));
}

#[test]
fn neumann_has_no_contour_solver() {
    let p = lookup("heat-neumann").unwrap();
    let s: ProblemSpec = p.spec(9).unwrap();
    assert!(matches!(solve_integral(&s, 0.01, &opts()), Err(Error::UnsupportedDiscretization { .. })));
}

#[test]
fn tightening_tolerance_does_not_stall() {
    let p = lookup("heat-dirichlet").unwrap();
    let s = p.spec(19).unwrap();
    let exact = solve_series(&s, 0.01, SeriesOptions::default()).unwrap();
    let errs: Vec<f64> = [1e-4, 1e-6, 1e-8, 1e-10]
        .iter()
        .map(|&tol| {
            let f = heat_dirichlet_integral(&s, 0.01, &ContourOptions { tol, ..opts() }).unwrap();
            f.max_abs_diff(&exact)
        })
        .collect();
    for (w, tol) in errs.windows(2).zip([1e-6, 1e-8, 1e-10]) {
        assert!(w[1] <= w[0].max(1e-12) || w[1] < tol, "{errs:?}");
    }
    assert!(errs[3] < 1e-9, "{errs:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn result_does_not_depend_on_the_path(
        which in 0usize..3,
        delta_frac in 0.05f64..0.95,
        height_frac in 0.2f64..1.0,
        theta in 0.3f64..1.2,
    ) {
        let (name, stencil) = [
            ("heat-dirichlet", StencilKind::CenteredO2),
            ("ls-dirichlet", StencilKind::CenteredO2),
            ("heat-dirichlet", StencilKind::CenteredO4),
        ][which];
        let mut s = lookup(name).unwrap().spec(19).unwrap();
        s.stencil = stencil;
        let h = s.grid.spacing();
        let t = 0.01;
        let tol = 1e-10;
        let base = solve_integral(&s, t, &ContourOptions { tol, ..opts() }).unwrap();
        let delta = delta_frac * PI / (4.0 * h);
        let cap = if name == "ls-dirichlet" { 2.0 * PI / h } else { 300.0 };
        let height = (2.0 * delta + 1.0).max(height_frac * cap);
        let alt = ContourOptions { tol, delta: Some(delta), height: Some(height), theta };
        let (up, down) = default_paths(&s, t, &alt).unwrap();
        let other = dirichlet_integral_on(&s, t, &up, &down, tol).unwrap();
        let scale = 1.0 + base.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(other.max_abs_diff(&base) < 2.0 * tol * scale * 10.0, "{}", other.max_abs_diff(&base));
    }
}
