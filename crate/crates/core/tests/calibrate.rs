use arctic_core::calibrate::{
    find_critical_points, fit_a, fit_all, kappa_by_alignment, kappa_of_tau, uniqueness_scan, z_u_critical_points,
    CalibrateError, CalibrateOptions, Region,
};
use arctic_core::scenarios::{Holey, HoleyParams};
use arctic_core::selftest::unit_points;
use num_complex::Complex64;

fn opts() -> CalibrateOptions {
    CalibrateOptions::default()
}

#[test]
fn c_u_is_affine_in_kappa() {
    let base = HoleyParams {
        a: 0.14,
        kappa: 0.2,
        tau_im: 0.7,
        delta: 0.0,
    };
    let m = Holey::new(base).unwrap();
    let (p1, p2) = Holey::new(HoleyParams { kappa: 0.6, ..base }).unwrap().c_u_parts(Complex64::new(0.3, 0.2)).unwrap();
    let (q1, q2) = m.c_u_parts(Complex64::new(0.3, 0.2)).unwrap();
    // The split itself does not depend on ϰ.
    assert!((p1 - q1).norm() < 1e-12 && (p2 - q2).norm() < 1e-12);
    for (p, q) in unit_points(20) {
        let u = Complex64::new(2.0 * p, (0.05 + 0.9 * q) * 0.7);
        let (c1, c2) = m.c_u_parts(u).unwrap();
        let cu = m.c_u(u).unwrap();
        assert!((cu - (c1 + 0.2 * c2)).norm() < 1e-12, "u = {u}");
    }
}

#[test]
fn fit_a_is_stable_under_tighter_tolerance() {
    let coarse = fit_a(0.7, 0.0, &opts()).unwrap();
    let fine = fit_a(0.7, 0.0, &CalibrateOptions { xtol: 1e-13, ..opts() }).unwrap();
    assert!(coarse.a > 0.0 && coarse.a < 0.25);
    assert!((coarse.a - fine.a).abs() < 1e-11, "{} vs {}", coarse.a, fine.a);
    assert!(coarse.gap.abs() < 1e-9);
}

#[test]
fn kappa_ratio_is_real_and_in_range() {
    for tau in [0.4, 0.7, 1.2] {
        let fa = fit_a(tau, 0.0, &opts()).unwrap();
        let kf = kappa_of_tau(tau, fa.a, 0.0, &opts()).unwrap();
        assert!(kf.kappa > 0.0 && kf.kappa < 1.0, "tau = {tau}: {}", kf.kappa);
        assert!((kf.kappa - kf.kappa_partner).abs() < 1e-6);
        assert!((kf.u1.re - 0.25).abs() < 1e-15 && (kf.u2.re - 0.75).abs() < 1e-15);
        assert!((kf.u1.im - fa.height).abs() < 1e-6);
    }
}

#[test]
fn ratio_agrees_with_direct_alignment() {
    let tau = 0.7;
    let fa = fit_a(tau, 0.0, &opts()).unwrap();
    let ratio = kappa_of_tau(tau, fa.a, 0.0, &opts()).unwrap().kappa;
    let direct = kappa_by_alignment(tau, fa.a, 0.0, &opts()).unwrap();
    assert!((ratio - direct).abs() < 1e-6, "{ratio} vs {direct}");
}

#[test]
fn tilt_breaks_partner_agreement() {
    let fa = fit_a(0.7, 0.15, &opts()).unwrap();
    let e = kappa_of_tau(0.7, fa.a, 0.15, &opts()).unwrap_err();
    assert!(matches!(e, CalibrateError::PartnerMismatch { .. }), "{e}");
    assert!(fit_all(0.15, &opts()).is_err());
}

#[test]
fn full_fit_hits_target_and_is_deterministic() {
    let a = fit_all(0.0, &opts()).unwrap();
    let b = fit_all(0.0, &opts()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_json().to_string(), b.to_json().to_string());
    assert!((a.params.kappa - 0.15).abs() < 1e-9);
    assert!(a.alignment_residual < 1e-8);
    assert_eq!(a.critical_points.len(), 2);
    let mut res: Vec<f64> = a.critical_points.iter().map(|u| u.re).collect();
    res.sort_by(f64::total_cmp);
    assert!((res[0] - 0.25).abs() < 1e-6 && (res[1] - 0.75).abs() < 1e-6, "{res:?}");
}

#[test]
fn halving_the_tolerance_refines_the_same_root() {
    let t1 = fit_all(0.0, &CalibrateOptions { xtol: 1e-6, ..opts() }).unwrap().params.tau_im;
    let t2 = fit_all(0.0, &CalibrateOptions { xtol: 5e-7, ..opts() }).unwrap().params.tau_im;
    let t3 = fit_all(0.0, &opts()).unwrap().params.tau_im;
    assert!((t1 - t3).abs() < 2e-6 && (t2 - t3).abs() < 1e-6, "{t1} {t2} {t3}");
}

#[test]
fn four_z_u_zeros_on_the_doubled_torus() {
    let r = fit_all(0.0, &opts()).unwrap();
    let m = Holey::new(r.params).unwrap();
    let h = r.params.tau_im;
    let region = Region {
        re_min: 0.0,
        re_max: 2.0,
        im_min: 0.01 * h,
        im_max: 0.99 * h,
        periodic: true,
    };
    let pts = find_critical_points(|u| m.z_u(u).ok(), region, 4, (160, 40)).unwrap();
    for (u, res) in &pts {
        assert!(*res < 1e-12);
        let frac = (u.re * 2.0).fract();
        assert!((frac - 0.5).abs() < 1e-6, "{u}");
    }
    assert_eq!(z_u_critical_points(&m, 2, (80, 40)).unwrap().points.len(), 2);
}

#[test]
fn uniqueness_scan_has_one_crossing() {
    let r = fit_all(0.0, &opts()).unwrap();
    let grid: Vec<f64> = (1..40).map(|i| i as f64 / 40.0).collect();
    let scan = uniqueness_scan(r.params.tau_im, r.params.a, 0.0, &grid, &opts()).unwrap();
    assert_eq!(scan.sign_changes, 1);
    assert!(scan.failures.is_empty(), "{:?}", scan.failures);
    // The crossing brackets the fitted ϰ.
    let finite: Vec<&(f64, f64)> = scan.rows.iter().filter(|r| r.1.is_finite()).collect();
    let w = finite.windows(2).find(|w| (w[0].1 > 0.0) != (w[1].1 > 0.0)).unwrap();
    assert!(w[0].0 <= r.params.kappa && r.params.kappa <= w[1].0);
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(fit_all(-0.1, &opts()).is_err());
    let narrow = CalibrateOptions {
        tau_bracket: (2.0, 3.0),
        ..opts()
    };
    assert!(matches!(fit_all(0.0, &narrow), Err(CalibrateError::Bracket { .. })));
}
