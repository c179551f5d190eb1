//! Elliptic kernel against independent oracles: direct lattice sums for ℘,
//! Jacobi's quartic theta identity, Legendre's relation and closed values
//! on the square lattice.

use std::f64::consts::PI;

use arctic_core::elliptic::{EllipticError, Lattice, SeriesConfig};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn taus() -> Vec<Complex64> {
    (0..20)
        .map(|k| {
            let t = k as f64 / 19.0;
            c(0.45 * (2.0 * t - 1.0) * (k % 3) as f64 / 2.0, 0.35 + 2.5 * t)
        })
        .collect()
}

/// ℘ by a direct symmetric lattice sum over |m|, |n| ≤ n_max.
fn wp_lattice_sum(z: Complex64, w1: Complex64, w2: Complex64, n_max: i64) -> Complex64 {
    let mut acc = 1.0 / (z * z);
    for m in -n_max..=n_max {
        for n in -n_max..=n_max {
            if m == 0 && n == 0 {
                continue;
            }
            let w = w1 * m as f64 + w2 * n as f64;
            acc += 1.0 / ((z - w) * (z - w)) - 1.0 / (w * w);
        }
    }
    acc
}

#[test]
fn legendre_relation_on_twenty_lattices() {
    for tau in taus() {
        let lat = Lattice::new(tau).unwrap();
        let (e1, e2) = lat.eta_constants();
        let lhs = e1 * lat.omega2() - e2 * lat.omega1();
        assert!((lhs - I * PI).norm() < 1e-10, "tau = {tau}: {lhs}");
    }
}

#[test]
fn zeta_quasi_periods() {
    for tau in taus() {
        let lat = Lattice::new(tau).unwrap();
        for z in [c(0.3, 0.1), c(-0.7, 0.4 * tau.im), c(1.1, -0.2)] {
            let z0 = lat.zeta(z).unwrap();
            let d1 = lat.zeta(z + lat.omega1()).unwrap() - z0;
            let d2 = lat.zeta(z + lat.omega2()).unwrap() - z0;
            assert!((d1 - 2.0 * lat.eta1()).norm() < 1e-10, "tau = {tau}");
            assert!((d2 - 2.0 * lat.eta2()).norm() < 1e-10, "tau = {tau}");
        }
    }
}

#[test]
fn square_lattice_constants() {
    let lat = Lattice::imaginary(1.0).unwrap();
    assert!((lat.eta1() - c(PI / 4.0, 0.0)).norm() < 1e-12);
    assert!((lat.k_prime().unwrap() - c(0.5f64.sqrt(), 0.0)).norm() < 1e-12);
    // For the square lattice, η₂ = −iπ/4 follows from η₁ and Legendre.
    assert!((lat.eta2() + I * PI / 4.0).norm() < 1e-12);
}

#[test]
fn wp_matches_lattice_sum() {
    // ℘ = −ζ'; the symmetric sum's truncation error is O(1/N²).
    for tau in [c(0.0, 1.0), c(0.2, 0.8), c(0.0, 1.7)] {
        let lat = Lattice::new(tau).unwrap();
        for z in [c(0.37, 0.21), c(0.9, 0.5 * tau.im)] {
            let h = 1e-4;
            let wp = -(lat.zeta(z + h).unwrap() - lat.zeta(z - h).unwrap()) / (2.0 * h);
            let direct = wp_lattice_sum(z, lat.omega1(), lat.omega2(), 400);
            let rel = (wp - direct).norm() / direct.norm();
            assert!(rel < 1e-5, "tau = {tau}, z = {z}: {wp} vs {direct}");
        }
    }
}

#[test]
fn jacobi_quartic_identity() {
    for tau in taus() {
        let lat = Lattice::new(tau).unwrap();
        let z0 = c(0.0, 0.0);
        let (t2, t3, t4) = (lat.theta2(z0).unwrap(), lat.theta3(z0).unwrap(), lat.theta4(z0).unwrap());
        let lhs = t3.powi(4);
        assert!((lhs - t2.powi(4) - t4.powi(4)).norm() < 1e-12 * lhs.norm().max(1.0), "tau = {tau}");
    }
}

#[test]
fn theta1_derivative_identity() {
    // θ₁' = θ₂θ₃θ₄ at 0, derivative taken in v = πz/2.
    for tau in taus() {
        let lat = Lattice::new(tau).unwrap();
        let z0 = c(0.0, 0.0);
        let prod = lat.theta2(z0).unwrap() * lat.theta3(z0).unwrap() * lat.theta4(z0).unwrap();
        assert!((lat.theta1_prime0() - prod).norm() < 1e-12, "tau = {tau}");
    }
}

#[test]
fn sigma_log_derivative_is_zeta() {
    let lat = Lattice::new(c(0.1, 0.9)).unwrap();
    for z in [c(0.4, 0.3), c(-0.6, 0.2), c(1.3, 0.5)] {
        let h = 1e-5;
        let d = (lat.sigma(z + h).unwrap().ln() - lat.sigma(z - h).unwrap().ln()) / (2.0 * h);
        assert!((d - lat.zeta(z).unwrap()).norm() < 1e-8, "z = {z}");
    }
}

#[test]
fn sigma_quasi_periodicity() {
    for tau in taus().into_iter().step_by(4) {
        let lat = Lattice::new(tau).unwrap();
        let z = c(0.31, 0.17);
        let s = lat.sigma(z).unwrap();
        for (w, eta) in [(lat.omega1(), lat.eta1()), (lat.omega2(), lat.eta2())] {
            let expected = -(2.0 * eta * (z + w / 2.0)).exp() * s;
            let got = lat.sigma(z + w).unwrap();
            assert!((got - expected).norm() < 1e-10 * expected.norm().max(1.0), "tau = {tau}");
        }
    }
}

#[test]
fn log_sigma_is_a_branch_of_log() {
    let lat = Lattice::imaginary(0.7).unwrap();
    for z in [c(0.3, 0.2), c(1.7, 0.6), c(0.9, -0.4), c(-0.5, -0.9)] {
        let l = lat.log_sigma(z).unwrap();
        assert!((l.exp() - lat.sigma(z).unwrap()).norm() < 1e-12, "z = {z}");
    }
    // Continuity across the real axis inside (0, 2).
    let up = lat.log_sigma_upper(c(0.8, 1e-9)).unwrap();
    let lo = lat.log_sigma_lower(c(0.8, -1e-9)).unwrap();
    assert!((up - lo).norm() < 1e-8);
}

#[test]
fn rejects_lower_half_plane_and_slow_series() {
    assert!(matches!(Lattice::new(c(0.0, -1.0)), Err(EllipticError::InvalidLattice { .. })));
    let tiny = SeriesConfig { rel_tol: 1e-17, max_terms: 2 };
    assert!(Lattice::with_config(c(0.0, 0.05), tiny).is_err());
}
