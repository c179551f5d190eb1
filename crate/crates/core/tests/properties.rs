use arctic_core::harmonic::Component;
use arctic_core::io::{curve_csv, fmt_f64, read_curve_csv, CurveRow};
use arctic_core::scenarios::{uniform_field, Holey, HoleyParams};
use arctic_core::tangent::solve_point;
use arctic_core::Lattice;
use num_complex::Complex64;
use proptest::prelude::*;

fn holey() -> Holey {
    Holey::new(HoleyParams {
        a: 0.14452,
        kappa: 0.1481,
        tau_im: 0.7,
        delta: 0.0,
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solve_point_ignores_common_complex_scale(
        re in -3.0..3.0f64, im in 0.05..3.0f64,
        r in 0.1..10.0f64, th in -3.0..3.0f64,
    ) {
        let mut f = uniform_field(Complex64::new(re, im)).unwrap();
        let (x, y, _) = solve_point(&f).unwrap();
        let l = Complex64::from_polar(r, th);
        f.ds_du *= l;
        f.dt_du *= l;
        f.dc_du *= l;
        let (x2, y2, _) = solve_point(&f).unwrap();
        prop_assert!((x - x2).abs() < 1e-9 * x.abs().max(1.0));
        prop_assert!((y - y2).abs() < 1e-9 * y.abs().max(1.0));
    }

    #[test]
    fn fmt_f64_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn sigma_is_odd(re in -1.5..1.5f64, im in -0.5..0.5f64, h in 0.4..2.0f64) {
        let lat = Lattice::imaginary(h).unwrap();
        let z = Complex64::new(re, im * h);
        prop_assume!(z.norm() > 1e-3);
        let a = lat.sigma(z).unwrap();
        let b = lat.sigma(-z).unwrap();
        prop_assert!((a + b).norm() < 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn zeta_quasi_period(re in -1.0..1.0f64, im in -0.4..0.4f64, h in 0.4..2.0f64) {
        let lat = Lattice::imaginary(h).unwrap();
        let z = Complex64::new(re, im * h);
        prop_assume!(z.norm() > 1e-2 && (z + lat.omega1()).norm() > 1e-2);
        let d = lat.zeta(z + lat.omega1()).unwrap() - lat.zeta(z).unwrap();
        prop_assert!((d - 2.0 * lat.eta1()).norm() < 1e-9);
    }

    #[test]
    fn t_is_s_shifted_by_half(p in 0.0..2.0f64, q in 0.02..0.98f64) {
        let m = holey();
        let u = Complex64::new(p, q * 0.7);
        prop_assert!((m.field(u).unwrap().t - m.field(u + 0.5).unwrap().s).abs() < 1e-12);
    }

    #[test]
    fn curve_csv_round_trips(
        rows in proptest::collection::vec(
            (any::<bool>(), -10.0..10.0f64, 0.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.0..5.0f64),
            0..40,
        )
    ) {
        let rows: Vec<CurveRow> = rows
            .into_iter()
            .map(|(inner, a, b, x, y, det)| CurveRow {
                component: if inner { Component::Inner } else { Component::Outer },
                u: Complex64::new(a, b),
                x,
                y,
                det,
            })
            .collect();
        let text = curve_csv(&rows).unwrap();
        let back = read_curve_csv(text.as_bytes()).unwrap();
        prop_assert_eq!(back, rows);
    }
}
