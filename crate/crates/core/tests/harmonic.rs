//! Harmonic extensions against a Fourier-series solution of the Dirichlet
//! problem on the periodic strip, plus mean-value, derivative, boundary and
//! symmetry properties of the assembled fields.

use std::f64::consts::PI;

use arctic_core::harmonic::{
    annulus_block_lower, annulus_block_upper, block_derivative_lower, extend_table, BoundarySegment,
    BoundaryTable, Component, HarmonicError,
};
use arctic_core::scenarios::{Holey, HoleyParams, TwoPeriodic};
use arctic_core::selftest::unit_points;
use arctic_core::Lattice;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Harmonic function on 0 < y < h, 2-periodic in x, equal to the indicator
/// of (a, b) on y = 0 (or on y = h when `top`) and 0 on the other line.
/// Fourier modes decay like exp(−πk·dist), so the sum is truncated once
/// they fall below 1e−18.
fn fourier_block(x: f64, y: f64, a: f64, b: f64, h: f64, top: bool) -> f64 {
    let d = if top { h - y } else { y };
    let mut f = (b - a) / 2.0 * (h - d) / h;
    let mut k = 1;
    loop {
        let kk = PI * k as f64;
        let decay = (-kk * d).exp();
        if decay < 1e-18 {
            break;
        }
        // sinh(kk(h−d))/sinh(kk·h) without overflow.
        let ratio = decay * (1.0 - (-2.0 * kk * (h - d)).exp()) / (1.0 - (-2.0 * kk * h).exp());
        // Indicator coefficients: (1/2)∫_a^b e^{−iπkx} dx, real part of the pair.
        let coef = ((kk * (b - x)).sin() - (kk * (a - x)).sin()) / kk;
        f += coef * ratio;
        k += 1;
    }
    f
}

#[test]
fn blocks_match_fourier_solution() {
    for &(h, a, b) in &[(0.6, 0.2, 0.9), (1.3, -0.4, 1.1), (0.35, 1.5, 2.3)] {
        let lat = Lattice::imaginary(h).unwrap();
        for (p, q) in unit_points(40) {
            let u = c(4.0 * p - 2.0, (0.05 + 0.9 * q) * h);
            let lo = annulus_block_lower(u, a, b, &lat).unwrap();
            let up = annulus_block_upper(u, a, b, &lat).unwrap();
            let lo_ref = fourier_block(u.re, u.im, a, b, h, false);
            let up_ref = fourier_block(u.re, u.im, a, b, h, true);
            assert!((lo - lo_ref).abs() < 1e-10, "lower h={h} ({a},{b}) u={u}: {lo} vs {lo_ref}");
            assert!((up - up_ref).abs() < 1e-10, "upper h={h} ({a},{b}) u={u}: {up} vs {up_ref}");
        }
    }
}

#[test]
fn block_derivative_matches_finite_difference() {
    let lat = Lattice::imaginary(0.8).unwrap();
    let (a, b) = (0.3, 1.4);
    let e = 1e-6;
    for (p, q) in unit_points(20) {
        let u = c(2.0 * p, (0.1 + 0.8 * q) * 0.8);
        let f = |v: Complex64| annulus_block_lower(v, a, b, &lat).unwrap();
        let fx = (f(u + e) - f(u - e)) / (2.0 * e);
        let fy = (f(u + c(0.0, e)) - f(u - c(0.0, e))) / (2.0 * e);
        let d = block_derivative_lower(u, a, b, &lat).unwrap();
        assert!((d - c(fx / 2.0, -fy / 2.0)).norm() < 1e-7, "u = {u}");
    }
}

fn calibrated_like() -> Holey {
    Holey::new(HoleyParams {
        a: 0.14452,
        kappa: 0.1481,
        tau_im: 0.7,
        delta: 0.0,
    })
    .unwrap()
}

#[test]
fn mean_value_property() {
    let m = calibrated_like();
    let tp = TwoPeriodic::from_b(0.5).unwrap();
    let r = 0.08;
    for (p, q) in unit_points(10) {
        for (field, h) in [
            (&(|u| m.field(u).unwrap()) as &dyn Fn(Complex64) -> _, 0.7),
            (&|u| tp.field(u).unwrap(), tp.tau_im()),
        ] {
            let u = c(2.0 * p, r + 0.01 + (h - 2.0 * r - 0.02) * q);
            let centre = field(u);
            let n = 256;
            let (mut s, mut t, mut cc) = (0.0, 0.0, 0.0);
            for j in 0..n {
                let f = field(u + Complex64::from_polar(r, 2.0 * PI * j as f64 / n as f64));
                s += f.s;
                t += f.t;
                cc += f.c;
            }
            let nf = n as f64;
            assert!((s / nf - centre.s).abs() < 1e-10, "s at {u}");
            assert!((t / nf - centre.t).abs() < 1e-10, "t at {u}");
            assert!((cc / nf - centre.c).abs() < 1e-10, "c at {u}");
        }
    }
}

#[test]
fn wirtinger_derivatives_of_holey_fields() {
    let m = calibrated_like();
    let e = 1e-6;
    for (p, q) in unit_points(20) {
        let u = c(2.0 * p, (0.1 + 0.8 * q) * 0.7);
        let f = m.field(u).unwrap();
        let px = m.field(u + e).unwrap();
        let mx = m.field(u - e).unwrap();
        let py = m.field(u + c(0.0, e)).unwrap();
        let my = m.field(u - c(0.0, e)).unwrap();
        let wirt = |a: f64, b: f64, cc: f64, d: f64| c((a - b) / (4.0 * e), -(cc - d) / (4.0 * e));
        assert!((f.ds_du - wirt(px.s, mx.s, py.s, my.s)).norm() < 1e-6);
        assert!((f.dt_du - wirt(px.t, mx.t, py.t, my.t)).norm() < 1e-6);
        assert!((f.dc_du - wirt(px.c, mx.c, py.c, my.c)).norm() < 1e-6);
    }
}

#[test]
fn laplacian_error_is_second_order() {
    // The five-point stencil of a harmonic function errs by O(h²): halving h
    // divides the stencil value by 4.
    let m = calibrated_like();
    let lap = |u: Complex64, h: f64| {
        let v = |d: Complex64| m.field(u + d).unwrap().c;
        (v(c(h, 0.0)) + v(c(-h, 0.0)) + v(c(0.0, h)) + v(c(0.0, -h)) - 4.0 * v(c(0.0, 0.0))) / (h * h)
    };
    for u in [c(0.3, 0.2), c(1.1, 0.35), c(1.7, 0.5)] {
        let (l1, l2) = (lap(u, 2e-3), lap(u, 1e-3));
        assert!((l1 / l2 - 4.0).abs() < 0.1, "u = {u}: {l1} {l2}");
    }
}

#[test]
fn holey_boundary_values_follow_table() {
    let m = calibrated_like();
    let table = m.boundary_table().clone();
    let h = table.tau_im;
    for seg in &table.segments {
        let x = seg.midpoint();
        let y = match seg.component {
            Component::Outer => 1e-9,
            Component::Inner => h - 1e-9,
        };
        let f = m.field(c(x, y)).unwrap();
        let tol = 1e-6;
        assert!((f.s - seg.s).abs() < tol, "{seg:?}: s = {}", f.s);
        assert!((f.t - seg.t).abs() < tol, "{seg:?}: t = {}", f.t);
        assert!((f.c - seg.c).abs() < tol, "{seg:?}: c = {}", f.c);
    }
}

#[test]
fn first_inner_interval_values() {
    // On (a1, a2) the holey data reads (s, t, c) = (−1, 0, ϰ/2).
    let m = calibrated_like();
    let p = *m.params();
    let pts = p.inner_points();
    let x = 0.5 * (pts[0] + pts[1]);
    let f = m.field(c(x, p.tau_im - 1e-9)).unwrap();
    assert!((f.s + 1.0).abs() < 1e-6 && f.t.abs() < 1e-6 && (f.c - p.kappa / 2.0).abs() < 1e-6, "{f:?}");
}

#[test]
fn periodicity_and_half_shift() {
    let m = calibrated_like();
    for (p, q) in unit_points(30) {
        let u = c(2.0 * p, (0.02 + 0.96 * q) * 0.7);
        let f = m.field(u).unwrap();
        let g = m.field(u + 2.0).unwrap();
        let half = m.field(u + 0.5).unwrap();
        assert!((f.s - g.s).abs() < 1e-12 && (f.t - g.t).abs() < 1e-12 && (f.c - g.c).abs() < 1e-12);
        assert!((f.t - half.s).abs() < 1e-12, "t(u) = s(u + 1/2) at {u}");
        // δ = 0: c is odd under the half shift.
        assert!((f.c + half.c).abs() < 1e-12, "c(u + 1/2) = −c(u) at {u}");
    }
}

#[test]
fn delta_enters_as_linear_term() {
    let base = calibrated_like();
    let tilted = Holey::new(HoleyParams {
        delta: 0.15,
        ..*base.params()
    })
    .unwrap();
    for (p, q) in unit_points(20) {
        let u = c(2.0 * p, (0.02 + 0.96 * q) * 0.7);
        let d = tilted.field(u).unwrap().c - base.field(u).unwrap().c;
        assert!((d + 0.15 * u.im).abs() < 1e-12, "u = {u}: {d}");
        assert_eq!(tilted.field(u).unwrap().s, base.field(u).unwrap().s);
    }
}

#[test]
fn reflection_antisymmetry_of_c() {
    let m = calibrated_like();
    for (p, q) in unit_points(20) {
        let u = c(p, (0.05 + 0.9 * q) * 0.7);
        let mirrored = c(1.0 - u.re, u.im);
        let f = m.field(u).unwrap();
        let g = m.field(mirrored).unwrap();
        assert!((f.c + g.c).abs() < 1e-12, "u = {u}");
    }
}

#[test]
fn table_text_round_trip() {
    let table = calibrated_like().boundary_table().clone();
    let text = table.to_text();
    let back = BoundaryTable::from_text(&text).unwrap();
    assert_eq!(back, table);
    assert!(text.contains("inferred"));
}

#[test]
fn custom_table_reproduces_model() {
    let tp = TwoPeriodic::from_b(0.5).unwrap();
    let table = BoundaryTable::from_text(&tp.boundary_table().to_text()).unwrap();
    let (s, t, cc) = extend_table(&table).unwrap();
    let u = c(0.37, 0.2);
    let f = tp.field(u).unwrap();
    assert!((s.value(u).unwrap() - f.s).abs() < 1e-15);
    assert!((t.value(u).unwrap() - f.t).abs() < 1e-15);
    assert!((cc.value(u).unwrap() - f.c).abs() < 1e-15);
}

#[test]
fn unbalanced_table_is_not_elliptic() {
    let table = BoundaryTable {
        tau_im: 0.7,
        delta: 0.0,
        constant: 0.0,
        segments: vec![
            BoundarySegment::new(Component::Outer, 0.0, 1.0, 1.0, 0.0, 0.0),
            BoundarySegment::new(Component::Outer, 1.0, 2.0, 0.0, 0.0, 0.0),
            BoundarySegment::new(Component::Inner, 0.0, 1.0, 0.0, 0.0, 0.0),
            BoundarySegment::new(Component::Inner, 1.0, 2.0, 0.0, 0.0, 0.0),
        ],
    };
    let e = extend_table(&table).unwrap_err();
    assert!(matches!(e, HarmonicError::NotElliptic { field: "s", .. }), "{e}");
}

#[test]
fn bad_tables_are_rejected() {
    assert!(BoundaryTable::from_text("tau_im = 0.5\nsegment = outer 0 3 0 0 0\n").is_err());
    assert!(BoundaryTable::from_text("tau_im = -1\n").is_err());
    assert!(BoundaryTable::from_text("segment = sideways 0 1 0 0 0\n").is_err());
}

#[test]
fn points_outside_the_annulus_are_rejected() {
    let m = calibrated_like();
    assert!(m.field(c(0.3, -0.01)).is_err());
    assert!(m.field(c(0.3, 0.71)).is_err());
}
