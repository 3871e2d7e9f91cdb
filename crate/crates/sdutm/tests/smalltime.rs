// SPDX-License-Identifier: Apache-2.0
mod common;

use std::f64::consts::PI;

use common::{advection, re};
use sdutm::problem::{StencilKind, TimeFunction};
use sdutm::quad::{integrate, uniform_breaks, QuadOptions};
use sdutm::smalltime::{moment_integral, smalltime_coefficients, smalltime_solve, MAX_ORDER};
use sdutm::C64;

const I: C64 = C64::new(0.0, 1.0);

fn moment_by_quadrature(m: usize, n: usize, interior: usize, h: f64, c: f64) -> C64 {
    let f = |k: f64| {
        let w = c * (1.0 - (I * k * h).exp()) / h;
        (I * k * (n as f64 - interior as f64) * h).exp() * w.powu(m as u32)
    };
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-13, max_depth: 30 };
    integrate(f, &uniform_breaks(-PI / h, PI / h, 16), opts).unwrap().0
}

#[test]
fn moment_integral_examples() {
    let (n, h, c) = (7usize, 0.5, 1.0);
    assert!((moment_integral(0, n, n, h, c) - 2.0 * PI / h).abs() < 1e-14);
    assert_eq!(moment_integral(0, n - 1, n, h, c), 0.0);
    assert_eq!(moment_integral(1, n - 2, n, h, c), 0.0);
    for (m, node) in [(1, n), (1, n - 1), (2, n), (2, n - 1), (2, n - 2), (3, n - 2)] {
        let exact = moment_integral(m, node, n, h, c);
        let quad = moment_by_quadrature(m, node, n, h, c);
        assert!((quad - re(exact)).norm() < 1e-8, "m={m} n={node}: {exact} vs {quad}");
    }
}

#[test]
fn first_coefficient_is_a_point_source() {
    let (c, v) = (1.5, 0.7);
    let s = advection(StencilKind::ForwardO1, 9, c, |_| re(0.0), TimeFunction::constant(v));
    let h = s.grid.spacing();
    let e = smalltime_coefficients(&s, 0.0, 1).unwrap();
    assert_eq!(e.coefficients.len(), 1);
    for (n, k) in e.coefficients[0].iter().enumerate() {
        let want = if n == 9 { c * v / h } else { 0.0 };
        assert!((k - re(want)).norm() < 1e-12, "n={n}: {k}");
    }
}

#[test]
fn second_coefficient_next_to_the_boundary() {
    let c = 2.0;
    let v = TimeFunction::polynomial(vec![re(0.5), re(3.0)]);
    let s = advection(StencilKind::ForwardO1, 9, c, |_| re(0.0), v.clone());
    let (n, h) = (9, s.grid.spacing());
    let t0 = 0.2;
    let e = smalltime_coefficients(&s, t0, 2).unwrap();
    // K_2(n) = c/(4 pi) (v' I_0(n) - v I_1(n)).
    for node in [n - 1, n] {
        let i0 = moment_by_quadrature(0, node, n, h, c);
        let i1 = moment_by_quadrature(1, node, n, h, c);
        let want = (i0 * 3.0 - i1 * v.eval(t0)) * (c / (4.0 * PI));
        assert!((e.coefficients[1][node] - want).norm() < 1e-8 * want.norm().max(1.0));
    }
    assert!((e.coefficients[1][n - 1] - re(c * c * v.eval(t0).re / (2.0 * h * h))).norm() < 1e-10);
}

#[test]
fn zero_boundary_data_gives_zero_coefficients() {
    let s = advection(StencilKind::ForwardO1, 12, 1.0, |x| re(x.sin()), TimeFunction::zero());
    let e = smalltime_coefficients(&s, 0.3, MAX_ORDER).unwrap();
    assert!(e.coefficients.iter().flatten().all(|k| k.norm() == 0.0));
}

#[test]
fn coefficient_support() {
    let v = TimeFunction::polynomial(vec![re(1.0), re(1.0), re(1.0)]);
    let s = advection(StencilKind::ForwardO1, 10, 1.0, |_| re(0.0), v);
    let e = smalltime_coefficients(&s, 0.0, 3).unwrap();
    for (l, row) in e.coefficients.iter().enumerate() {
        let l = l + 1;
        for (node, k) in row.iter().enumerate() {
            if node + l < 11 {
                assert_eq!(k.norm(), 0.0, "K_{l}({node})");
            }
        }
        assert!(row[11 - l].norm() > 0.0, "K_{l}({}) should be nonzero", 11 - l);
    }
}

#[test]
fn zero_increment_returns_the_data() {
    let v = TimeFunction::sine(1.0, 5.0);
    let s = advection(StencilKind::ForwardO1, 15, 1.0, |x| re((2.0 * x).cos()), v.clone());
    let (field, diags) = smalltime_solve(&s, 0.4, 0.0, 2).unwrap();
    assert!(diags.is_empty());
    assert_eq!(field.t, 0.4);
    for (a, b) in field.values[..16].iter().zip(&s.initial) {
        assert!((a - b).norm() < 1e-15);
    }
    assert!((field.values[16] - v.eval(0.4)).norm() < 1e-15);
}

#[test]
fn constant_state_error_bound() {
    let c = 1.0;
    let s = advection(StencilKind::ForwardO1, 19, c, |_| re(1.0), TimeFunction::constant(1.0));
    let h = s.grid.spacing();
    for order in 1..=MAX_ORDER {
        for tau in [0.2 * h, 0.05 * h, 0.01 * h] {
            let (field, _) = smalltime_solve(&s, 0.0, tau, order).unwrap();
            let a = c * tau / h;
            let worst = field.values.iter().map(|q| (q - 1.0).norm()).fold(0.0, f64::max);
            assert!(worst <= 10.0 * a.powi(order as i32 + 1), "order {order}, a = {a}: {worst:e}");
        }
    }
}

#[test]
fn large_increment_is_flagged() {
    let s = advection(StencilKind::ForwardO1, 9, 2.0, |_| re(0.0), TimeFunction::constant(1.0));
    let h = s.grid.spacing();
    let (_, diags) = smalltime_solve(&s, 0.0, h, 1).unwrap();
    assert_eq!(diags.len(), 1);
    assert_eq!(diags[0].code, "large-increment");
    let (_, diags) = smalltime_solve(&s, 0.0, 0.4 * h, 1).unwrap();
    assert!(diags.is_empty());
}

#[test]
fn other_stencils_have_no_small_time_form() {
    let s = advection(StencilKind::ForwardO2, 9, 1.0, |_| re(0.0), TimeFunction::constant(1.0));
    let err = smalltime_solve(&s, 0.0, 0.01, 1).unwrap_err();
    assert_eq!(err.reason(), Some("no-small-time-form"));
}

#[test]
fn order_must_be_in_range() {
    let s = advection(StencilKind::ForwardO1, 9, 1.0, |_| re(0.0), TimeFunction::constant(1.0));
    for order in [0, MAX_ORDER + 1] {
        assert!(matches!(smalltime_coefficients(&s, 0.0, order), Err(sdutm::Error::InvalidArgument(_))));
    }
    assert!(smalltime_solve(&s, 0.0, -1e-3, 1).is_err());
}
