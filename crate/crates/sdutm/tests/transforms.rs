// SPDX-License-Identifier: Apache-2.0
#![allow(clippy::needless_range_loop)]
mod common;

use std::f64::consts::PI;

use common::re;
use proptest::prelude::*;
use sdutm::make_grid;
use sdutm::problem::{sample_initial, TimeFunction};
use sdutm::quad::{gauss_legendre, integrate, uniform_breaks, QuadOptions};
use sdutm::transforms::{
    boundary_combination, cosine_coefficients, damped_transform, forward_fourier_sum, sine_coefficients,
    time_transform,
};
use sdutm::{Error, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

#[test]
fn fourier_sum_examples() {
    let h = 0.2;
    let k = C64::new(2.3, 0.4);
    assert_eq!(forward_fourier_sum(&[ZERO; 6], k, 0..6, h), ZERO);

    let ones = vec![re(1.0); 6];
    assert!((forward_fourier_sum(&ones, ZERO, 1..5, h) - re(4.0 * h)).norm() < 1e-15);

    let mut spike = vec![ZERO; 6];
    spike[3] = re(1.0);
    let want = (C64::new(0.0, -1.0) * k * 3.0 * h).exp() * h;
    assert!((forward_fourier_sum(&spike, k, 0..6, h) - want).norm() < 1e-14);
}

#[test]
fn fourier_sum_matches_direct() {
    let vals: Vec<C64> = (0..30).map(|n| C64::new((n as f64).sin(), 0.1 * n as f64)).collect();
    let h = 0.03;
    let k = C64::new(17.0, -2.5);
    let direct: C64 = (4..27).map(|n| h * (C64::new(0.0, -1.0) * k * (n as f64) * h).exp() * vals[n]).sum();
    assert!((forward_fourier_sum(&vals, k, 4..27, h) - direct).norm() < 1e-12 * direct.norm());
}

#[test]
fn constant_transforms() {
    let tt = time_transform(&TimeFunction::constant(1.0), ZERO, 2.0, 1e-12).unwrap();
    assert!((tt.value - re(2.0)).norm() < 1e-15);
    let tt = time_transform(&TimeFunction::constant(2.0), re(1.0), 1.0, 1e-12).unwrap();
    assert!((tt.value - re(2.0 * (1f64.exp() - 1.0))).norm() < 1e-14);
}

#[test]
fn sine_transform_matches_antiderivative() {
    // int_0^T e^{Wt} sin(3t) dt = Im-free closed form via e^{(W +- 3i) t}.
    let w = C64::new(2.0, 1.0);
    let t = 1.0;
    let i = C64::new(0.0, 1.0);
    let part = |a: C64| ((a * t).exp() - 1.0) / a;
    let want = (part(w + 3.0 * i) - part(w - 3.0 * i)) / (2.0 * i);
    let got = time_transform(&TimeFunction::sine(1.0, 3.0), w, t, 1e-12).unwrap().value;
    assert!((got - want).norm() < 1e-12);
}

#[test]
fn custom_data_uses_quadrature() {
    let w = C64::new(-3.0, 40.0);
    let t = 0.7;
    let closed = time_transform(&TimeFunction::sine(1.0, 3.0), w, t, 1e-12).unwrap().value;
    let custom = TimeFunction::custom(|s| re((3.0 * s).sin()));
    let quad = time_transform(&custom, w, t, 1e-12).unwrap().value;
    assert!((closed - quad).norm() < 1e-10 * (1.0 + closed.norm()));
}

#[test]
fn damped_form_agrees_when_representable() {
    let v = TimeFunction::polynomial(vec![re(1.0), re(-2.0), re(0.5)]);
    let w = C64::new(3.0, -7.0);
    let t = 0.8;
    let d = damped_transform(&v, w, t, 1e-12).unwrap();
    let u = time_transform(&v, w, t, 1e-12).unwrap().value;
    assert!((d - (-w * t).exp() * u).norm() < 1e-13);
}

#[test]
fn damped_form_survives_huge_rates() {
    // e^{-WT} underflows and the undamped transform overflows; the product is 1/W-sized.
    let w = re(4.0e6);
    let d = damped_transform(&TimeFunction::constant(1.0), w, 1.0, 1e-12).unwrap();
    assert!((d - re(1.0 / 4.0e6)).norm() < 1e-18);
}

#[test]
fn sine_coefficient_examples() {
    let g = make_grid(1.0, 15).unwrap();
    assert!(sine_coefficients(&vec![ZERO; 17], &g).iter().all(|b| b.norm() == 0.0));
    for l0 in [1, 4, 15] {
        let phi = sample_initial(&g, |x| re((PI * l0 as f64 * x).sin()));
        let b = sine_coefficients(&phi, &g);
        assert_eq!(b.len(), 17);
        assert_eq!(b[0], ZERO);
        assert_eq!(b[16], ZERO);
        for (l, bl) in b.iter().enumerate() {
            let want = if l == l0 { 1.0 } else { 0.0 };
            assert!((bl - re(want)).norm() < 1e-13, "l0={l0} l={l}: {bl}");
        }
    }
}

#[test]
fn cosine_coefficient_examples() {
    let (l, n) = (1.0, 12);
    let g = make_grid(l, n).unwrap();
    let h = g.spacing();
    assert!(cosine_coefficients(&vec![ZERO; n + 2], &g).iter().all(|b| b.norm() == 0.0));

    let c = 2.5;
    let b = cosine_coefficients(&vec![re(c); n + 2], &g);
    assert!((b[0] - re(2.0 * h * c * (n as f64 + 2.0) / l)).norm() < 1e-13);
    assert!(b[1..].iter().all(|z| z.norm() < 1e-13));

    let l0 = 5;
    let phi: Vec<C64> = (0..n + 2)
        .map(|m| re((PI * l0 as f64 * (m as f64 + 0.5) * h / (l + h)).cos()))
        .collect();
    let b = cosine_coefficients(&phi, &g);
    for (ll, bl) in b.iter().enumerate() {
        if ll != l0 {
            assert!(bl.norm() < 1e-13, "l={ll}: {bl}");
        }
    }
    assert!(b[l0].norm() > 0.5);
}

#[test]
fn sine_reconstruction() {
    let g = make_grid(1.0, 40).unwrap();
    let phi = sample_initial(&g, |x| C64::new((7.0 * x).exp() * x * (1.0 - x), x.cos()));
    let b = sine_coefficients(&phi, &g);
    for n in 1..=40 {
        let q: C64 = (1..=40).map(|l| b[l] * (PI * (l * n) as f64 / 41.0).sin()).sum();
        assert!((q - phi[n]).norm() < 1e-10);
    }
}

#[test]
fn boundary_combination_sign_rule() {
    let z = boundary_combination(&[ZERO; 4], &[ZERO; 4]).unwrap();
    assert!(z.iter().all(|v| *v == ZERO));
    let (a, b) = (re(3.0), C64::new(1.0, 2.0));
    let h = boundary_combination(&[a, a, a, a], &[b, b, b, b]).unwrap();
    assert_eq!(h[0], a - b);
    assert_eq!(h[1], a + b);
    assert_eq!(h[2], a - b);
    assert_eq!(h[3], a + b);
    assert!(matches!(boundary_combination(&[a], &[a, b]), Err(Error::InvalidArgument(_))));
}

#[test]
fn quadrature_basics() {
    let (v, _) = integrate(|x| re(x.powi(5)), &[0.0, 2.0], QuadOptions::default()).unwrap();
    assert!((v.re - 64.0 / 6.0).abs() < 1e-12);

    let w = 200.0;
    let (v, _) =
        integrate(|x| C64::new(0.0, w * x).exp(), &uniform_breaks(0.0, 1.0, 64), QuadOptions::with_tol(1e-12)).unwrap();
    let exact = (C64::new(0.0, w).exp() - 1.0) / C64::new(0.0, w);
    assert!((v - exact).norm() < 1e-12);

    let (x, wts) = gauss_legendre(16);
    let s: f64 = x.iter().zip(&wts).map(|(x, w)| w * x.powi(30)).sum();
    assert!((s - 2.0 / 31.0).abs() < 1e-14);
}

#[test]
fn quadrature_depth_cap() {
    let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-15, max_depth: 2 };
    let r = integrate(|x| re(x.abs().sqrt()), &[-1.0, 1.0], opts);
    assert!(matches!(r, Err(Error::AccuracyFailure { .. })));
}

proptest! {
    #[test]
    fn coefficient_maps_are_linear(
        seed in prop::collection::vec(-1.0f64..1.0, 22),
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
    ) {
        let g = make_grid(1.0, 9).unwrap();
        let p1: Vec<C64> = seed[..11].iter().map(|&x| re(x)).collect();
        let p2: Vec<C64> = seed[11..].iter().map(|&x| C64::new(0.0, x)).collect();
        let mix: Vec<C64> = p1.iter().zip(&p2).map(|(a, b)| a * alpha + b * beta).collect();
        for f in [sine_coefficients, cosine_coefficients] {
            let (b1, b2, bm) = (f(&p1, &g), f(&p2, &g), f(&mix, &g));
            for i in 0..bm.len() {
                prop_assert!((bm[i] - (b1[i] * alpha + b2[i] * beta)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_matches_quadrature(
        a in -2.0f64..2.0,
        w in 0.5f64..6.0,
        wr in -20.0f64..5.0,
        wi in -60.0f64..60.0,
        t in 0.05f64..1.5,
    ) {
        let w_rate = C64::new(wr, wi);
        let closed = time_transform(&TimeFunction::cosine(a, w), w_rate, t, 1e-12).unwrap().value;
        let f = TimeFunction::custom(move |s| re(a * (w * s).cos()));
        let quad = time_transform(&f, w_rate, t, 1e-12).unwrap().value;
        prop_assert!((closed - quad).norm() <= 1e-10 * (1.0 + closed.norm()));
    }
}
