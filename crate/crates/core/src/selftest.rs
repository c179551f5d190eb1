//! Built-in acceptance checks with measured values, tolerances and timings.
//!
//! Each check returns a [`CheckReport`] listing its measurements; a check
//! passes when every measurement is below its tolerance and the run fits
//! in its time budget. Tolerances can be overridden through environment
//! variables `ARCTIC_TOL_<FIELD>` (e.g. `ARCTIC_TOL_CIRCLE=1e-20`), which is
//! how the harness itself is tested.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calibrate::{self, CalibrateOptions, CalibrationResult};
use crate::elliptic::Lattice;
use crate::harmonic::Component;
use crate::scenarios::{self, FieldSample, Holey, Model, TwoPeriodic};
use crate::tangent::{self, GridSpec, HeightMesh};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub circle: f64,
    pub inversion: f64,
    pub legendre: f64,
    pub quasi_period: f64,
    pub k_prime: f64,
    pub eta1: f64,
    pub laplacian: f64,
    pub bubble_field: f64,
    pub bubble_height: f64,
    pub degeneration: f64,
    pub alignment: f64,
    pub critical_re: f64,
    pub kappa_agreement: f64,
    pub half_shift: f64,
    pub rescaling: f64,
    pub rotation: f64,
    pub tangency: f64,
    /// Multiplies every time budget.
    pub time_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            circle: 1e-5,
            inversion: 1e-9,
            legendre: 1e-10,
            quasi_period: 1e-10,
            k_prime: 1e-10,
            eta1: 1e-10,
            laplacian: 1e-4,
            bubble_field: 2e-3,
            bubble_height: 5e-3,
            degeneration: 1e-3,
            alignment: 1e-6,
            critical_re: 1e-6,
            kappa_agreement: 1e-6,
            half_shift: 1e-10,
            rescaling: 1e-12,
            rotation: 1e-4,
            tangency: 1e-10,
            time_factor: 1.0,
        }
    }
}

impl Tolerances {
    /// Defaults with `ARCTIC_TOL_*` overrides applied. Unparsable or
    /// unknown variables are reported as errors.
    pub fn from_env() -> Result<Self, String> {
        Self::with_overrides(std::env::vars())
    }

    pub fn with_overrides<I: IntoIterator<Item = (String, String)>>(vars: I) -> Result<Self, String> {
        let mut map = match serde_json::to_value(Self::default()).expect("tolerances serialize") {
            serde_json::Value::Object(m) => m,
            _ => unreachable!(),
        };
        for (key, value) in vars {
            let Some(field) = key.strip_prefix("ARCTIC_TOL_") else { continue };
            let field = field.to_ascii_lowercase();
            if !map.contains_key(&field) {
                return Err(format!("{key}: no tolerance named '{field}'"));
            }
            let v: f64 = value.trim().parse().map_err(|_| format!("{key}: '{value}' is not a number"))?;
            map.insert(field, serde_json::json!(v));
        }
        serde_json::from_value(serde_json::Value::Object(map)).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl Measurement {
    pub fn passed(&self) -> bool {
        self.value < self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: u8,
    pub title: String,
    pub measurements: Vec<Measurement>,
    /// Context that does not affect the verdict.
    pub notes: Vec<String>,
    pub error: Option<String>,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.elapsed <= self.budget && self.measurements.iter().all(Measurement::passed)
    }

    /// One line: `[PASS] 3 elliptic kernel identities (0.012 s / 5 s): ...`.
    pub fn line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let mut parts: Vec<String> = self
            .measurements
            .iter()
            .map(|m| {
                let mark = if m.passed() { "" } else { " !" };
                format!("{} = {:.3e} < {:.1e}{mark}", m.name, m.value, m.tolerance)
            })
            .collect();
        parts.extend(self.notes.iter().cloned());
        if let Some(e) = &self.error {
            parts.push(format!("error: {e}"));
        }
        if self.elapsed > self.budget {
            parts.push("over time budget".into());
        }
        format!(
            "[{status}] {:>2} {} ({:.3} s / {} s): {}",
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs_f64(),
            parts.join("; ")
        )
    }
}

pub const CHECK_IDS: std::ops::RangeInclusive<u8> = 1..=10;

fn title(id: u8) -> (&'static str, u64) {
    match id {
        1 => ("arctic circle", 1),
        2 => ("closed-form inversion", 1),
        3 => ("elliptic kernel identities", 5),
        4 => ("harmonicity", 10),
        5 => ("gas-bubble plane", 10),
        6 => ("degeneration to the cylinder", 5),
        7 => ("calibration fixed point", 300),
        8 => ("uniqueness scan", 120),
        9 => ("symmetries", 30),
        10 => ("tangency residual", 60),
        _ => ("unknown", 0),
    }
}

struct Outcome {
    measurements: Vec<Measurement>,
    notes: Vec<String>,
}

impl From<Vec<Measurement>> for Outcome {
    fn from(measurements: Vec<Measurement>) -> Self {
        Self {
            measurements,
            notes: Vec::new(),
        }
    }
}

type Measured = Result<Outcome, String>;

fn m(name: &str, value: f64, tolerance: f64) -> Measurement {
    // NaN must fail.
    let value = if value.is_nan() { f64::INFINITY } else { value };
    Measurement {
        name: name.into(),
        value,
        tolerance,
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Low-discrepancy points in [0, 1)² (additive recurrence).
pub fn unit_points(n: usize) -> Vec<(f64, f64)> {
    const G: f64 = 1.324_717_957_244_746;
    let (a1, a2) = (1.0 / G, 1.0 / (G * G));
    (1..=n)
        .map(|i| ((0.5 + a1 * i as f64).fract(), (0.5 + a2 * i as f64).fract()))
        .collect()
}

/// Default tracing parameters of the checks.
pub const N_SAMPLES: usize = 1000;
pub const EPS: f64 = 1e-6;

fn check_circle(tol: &Tolerances) -> Measured {
    let curve = tangent::trace_all(&Model::Uniform, N_SAMPLES, EPS).map_err(err)?;
    let dev = curve
        .all_samples()
        .map(|s| ((s.x - 0.5).hypot(s.y - 0.5) - 0.5).abs())
        .fold(0.0, f64::max);
    let count = curve.all_samples().count();
    Ok(Outcome::from(vec![
        m("max |r - 1/2|", dev, tol.circle),
        m("dropped samples", (N_SAMPLES - count) as f64, 1.0),
    ]))
}

fn check_inversion(tol: &Tolerances) -> Measured {
    let mut worst: f64 = 0.0;
    for (p, q) in unit_points(100) {
        // Interior points of the liquid region ↔ upper half-plane.
        let z = Complex64::new(4.0 * p - 2.0, 0.05 + 2.0 * q);
        let f = scenarios::uniform_field(z).map_err(err)?;
        let (x, y, _) = tangent::solve_point(&f).map_err(err)?;
        let back = tangent::invert_uniform(x, y).map_err(err)?;
        worst = worst.max((back - z).norm());
    }
    Ok(vec![m("max |z(x(z), y(z)) - z|", worst, tol.inversion)].into())
}

fn check_elliptic(tol: &Tolerances) -> Measured {
    let i = Complex64::new(0.0, 1.0);
    let (mut legendre, mut quasi): (f64, f64) = (0.0, 0.0);
    for (p, q) in unit_points(20) {
        let tau = Complex64::new(p - 0.5, 0.4 + 2.0 * q);
        let lat = Lattice::new(tau).map_err(err)?;
        let (e1, e2) = lat.eta_constants();
        let (w1, w2) = (lat.omega1(), lat.omega2());
        legendre = legendre.max((e1 * w2 - e2 * w1 - i * PI).norm());
        let z = Complex64::new(0.3, 0.2 * tau.im);
        let z0 = lat.zeta(z).map_err(err)?;
        let d1 = lat.zeta(z + w1).map_err(err)? - z0 - 2.0 * e1;
        let d2 = lat.zeta(z + w2).map_err(err)? - z0 - 2.0 * e2;
        quasi = quasi.max(d1.norm()).max(d2.norm());
    }
    let sq = Lattice::imaginary(1.0).map_err(err)?;
    let kp = (sq.k_prime().map_err(err)? - 1.0 / 2f64.sqrt()).norm();
    let eta = (sq.eta1() - PI / 4.0).norm();
    Ok(Outcome::from(vec![
        m("Legendre", legendre, tol.legendre),
        m("zeta quasi-period", quasi, tol.quasi_period),
        m("k'(i) - 1/sqrt2", kp, tol.k_prime),
        m("eta1(i) - pi/4", eta, tol.eta1),
    ]))
}

fn laplacian<F: Fn(Complex64) -> Result<FieldSample, String>>(f: F, points: &[Complex64], h: f64) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for &u in points {
        let at = |d: Complex64| f(u + d).map(|s| [s.s, s.t, s.c]);
        let c = at(Complex64::new(0.0, 0.0))?;
        let nb = [
            at(Complex64::new(h, 0.0))?,
            at(Complex64::new(-h, 0.0))?,
            at(Complex64::new(0.0, h))?,
            at(Complex64::new(0.0, -h))?,
        ];
        for k in 0..3 {
            let lap = (nb.iter().map(|v| v[k]).sum::<f64>() - 4.0 * c[k]) / (h * h);
            worst = worst.max(lap.abs());
        }
    }
    Ok(worst)
}

fn check_harmonicity(tol: &Tolerances) -> Measured {
    let h = 1e-3;
    let pts = unit_points(100);
    let uniform: Vec<Complex64> = pts.iter().map(|&(p, q)| Complex64::new(4.0 * p - 2.0, 0.1 + 2.0 * q)).collect();
    let lap_u = laplacian(|z| scenarios::uniform_field(z).map_err(err), &uniform, h)?;
    let tp = TwoPeriodic::from_b(0.5).map_err(err)?;
    // The stencil error is h²·|∂⁴f|/12, which grows like d⁻⁴ near the
    // boundary jumps; the annulus points fill the middle band 0.4H..0.6H.
    let strip = |height: f64| -> Vec<Complex64> {
        pts.iter()
            .map(|&(p, q)| Complex64::new(2.0 * p, (0.4 + 0.2 * q) * height))
            .collect()
    };
    let lap_2p = laplacian(|u| tp.field(u).map_err(err), &strip(tp.tau_im()), h)?;
    let holey = calibrated(&CalibrateOptions::default())?;
    let hm = Holey::new(holey.params).map_err(err)?;
    let lap_h = laplacian(|u| hm.field(u).map_err(err), &strip(holey.params.tau_im), h)?;
    // A pure truncation error shrinks by 4 when h halves; anything that
    // does not is a genuine failure of harmonicity.
    let lap_h2 = laplacian(|u| hm.field(u).map_err(err), &strip(holey.params.tau_im), h / 2.0)?;
    Ok(Outcome {
        measurements: vec![
            m("uniform", lap_u, tol.laplacian),
            m("two-periodic", lap_2p, tol.laplacian),
            m("holey", lap_h, tol.laplacian),
        ],
        notes: vec![format!("holey at h/2 = {lap_h2:.3e}, ratio {:.3}", lap_h / lap_h2)],
    })
}

/// Mesh points with |s|, |t| below `slope` and their largest |h|.
pub fn flat_region_height(mesh: &HeightMesh, slope: f64) -> (usize, f64) {
    let pts: Vec<f64> = mesh
        .valid()
        .filter(|p| p.s.abs() < slope && p.t.abs() < slope)
        .map(|p| p.h.abs())
        .collect();
    (pts.len(), pts.iter().copied().fold(0.0, f64::max))
}

fn check_bubble(tol: &Tolerances) -> Measured {
    let tp = TwoPeriodic::from_b(0.5).map_err(err)?;
    let h = tp.tau_im();
    let mut field: f64 = 0.0;
    for j in 0..200 {
        let u = Complex64::new(-0.5 + j as f64 / 100.0, h - 1e-4);
        let f = tp.field(u).map_err(err)?;
        field = field.max(f.s.abs()).max(f.t.abs()).max(f.c.abs());
    }
    let model = Model::TwoPeriodic(tp);
    let mesh = tangent::sample_height(&model, GridSpec { nx: 128, ny: 64 }).map_err(err)?;
    let (count, height) = flat_region_height(&mesh, 1e-2);
    Ok(Outcome::from(vec![
        m("max |s|,|t|,|c| at the bubble", field, tol.bubble_field),
        m("max |h| where |s|,|t| < 1e-2", height, tol.bubble_height),
        m("missing flat-region samples", if count > 0 { 0.0 } else { 1.0 }, 0.5),
    ]))
}

/// Two-periodic field at τ = 5i against the cylinder field mapped to the
/// 2×2 normalization.
pub fn degeneration_error(points: usize) -> Result<f64, String> {
    let tp = TwoPeriodic::from_tau(5.0).map_err(err)?;
    let mut worst: f64 = 0.0;
    for (p, q) in unit_points(points) {
        let z = Complex64::new(2.0 * p - 1.0, 0.05 + 1.95 * q);
        let a = scenarios::uniform_field_cylinder(z).map_err(err)?;
        let b = tp.field(z + 0.5).map_err(err)?;
        let mapped = [a.s - a.t, a.s + a.t - 1.0, 2.0 * a.c + a.s + a.t - 1.5];
        for (x, y) in mapped.iter().zip([b.s, b.t, b.c]) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

fn check_degeneration(tol: &Tolerances) -> Measured {
    Ok(vec![m("max field difference", degeneration_error(50)?, tol.degeneration)].into())
}

fn calibrated(opts: &CalibrateOptions) -> Result<CalibrationResult, String> {
    calibrate::fit_all(0.0, opts).map_err(err)
}

fn check_calibration(tol: &Tolerances) -> Measured {
    let opts = CalibrateOptions::default();
    let r = calibrated(&opts)?;
    let p = r.params;
    let model = Holey::new(p).map_err(err)?;
    let crit = calibrate::z_u_critical_points(&model, 2, (64, 64)).map_err(err)?;
    let re_dev = crit
        .points
        .iter()
        .map(|u| (u.re - 0.25).abs().min((u.re - 0.75).abs()))
        .fold(0.0, f64::max);
    let ratio = calibrate::kappa_of_tau(p.tau_im, p.a, 0.0, &opts).map_err(err)?;
    let direct = calibrate::kappa_by_alignment(p.tau_im, p.a, 0.0, &opts).map_err(err)?;
    Ok(Outcome::from(vec![
        m("alignment residual", r.alignment_residual, tol.alignment),
        m("max |Re u* - {0.25, 0.75}|", re_dev, tol.critical_re),
        m("|kappa ratio - kappa direct|", (ratio.kappa - direct).abs(), tol.kappa_agreement),
    ]))
}

fn check_uniqueness(_tol: &Tolerances) -> Measured {
    let opts = CalibrateOptions::default();
    let r = calibrated(&opts)?;
    let grid: Vec<f64> = (0..50).map(|i| (i as f64 + 0.5) / 50.0).collect();
    let scan = calibrate::uniqueness_scan(r.params.tau_im, r.params.a, 0.0, &grid, &opts).map_err(err)?;
    let missing: Vec<String> = scan
        .rows
        .iter()
        .filter(|r| !r.1.is_finite())
        .map(|r| format!("{}", r.0))
        .collect();
    let mut notes = vec![format!("sign changes = {}", scan.sign_changes)];
    if !missing.is_empty() {
        notes.push(format!("no c_u root inside the strip at kappa = {}", missing.join(", ")));
    }
    Ok(Outcome {
        measurements: vec![m("|sign changes - 1|", (scan.sign_changes as f64 - 1.0).abs(), 0.5)],
        notes,
    })
}

/// Largest distance between the holey curves and their images under the
/// quarter turn (x, y) ↦ (−y, x), which u ↦ u + 1/2 realizes.
pub fn rotation_defect(model: &Model, n: usize) -> Result<f64, String> {
    let steps = 0.5 / model.domain().period * n as f64;
    if (steps - steps.round()).abs() > 1e-9 {
        return Err(format!("a shift by 1/2 is not a whole number of the {n} samples"));
    }
    let curve = tangent::trace_all(model, n, EPS).map_err(err)?;
    let mut worst: f64 = 0.0;
    for comp in [Component::Inner, Component::Outer] {
        let piece = curve.piece(comp).ok_or("missing component")?;
        if !piece.dropped.is_empty() {
            return Err(format!("{comp}: {} degenerate samples", piece.dropped.len()));
        }
        let s = &piece.samples;
        let shift = (0.5 / model.domain().period * n as f64).round() as usize;
        for j in 0..n {
            let a = s[j];
            let b = s[(j + shift) % n];
            worst = worst.max((b.x + a.y).hypot(b.y - a.x));
        }
    }
    Ok(worst)
}

fn check_symmetry(tol: &Tolerances) -> Measured {
    let r = calibrated(&CalibrateOptions::default())?;
    let hm = Holey::new(r.params).map_err(err)?;
    let h = r.params.tau_im;
    let mut shift: f64 = 0.0;
    for (p, q) in unit_points(100) {
        let u = Complex64::new(p, (0.02 + 0.96 * q) * h);
        let a = hm.field(u).map_err(err)?;
        let b = hm.field(u + 0.5).map_err(err)?;
        shift = shift.max((a.t - b.s).abs());
    }
    let mut rescale: f64 = 0.0;
    for (p, q) in unit_points(50) {
        let u = Complex64::new(p, (0.05 + 0.9 * q) * h);
        let f = hm.field(u).map_err(err)?;
        let (x, y, _) = tangent::solve_point(&f).map_err(err)?;
        let lam = Complex64::from_polar(1e-3 + 1e3 * q, 2.0 * PI * p);
        let g = FieldSample {
            ds_du: f.ds_du * lam,
            dt_du: f.dt_du * lam,
            dc_du: f.dc_du * lam,
            ..f
        };
        let (x2, y2, _) = tangent::solve_point(&g).map_err(err)?;
        rescale = rescale.max((x2 - x).abs().max((y2 - y).abs()) / x.abs().max(y.abs()).max(1.0));
    }
    let rot = rotation_defect(&Model::Holey(hm), N_SAMPLES)?;
    Ok(Outcome::from(vec![
        m("max |t(u) - s(u+1/2)|", shift, tol.half_shift),
        m("rescaling invariance", rescale, tol.rescaling),
        m("quarter-turn defect", rot, tol.rotation),
    ]))
}

/// Largest tangency residual over every retained curve sample and mesh
/// point of the model.
pub fn max_tangency_residual(model: &Model, grid: GridSpec) -> Result<f64, String> {
    let curve = tangent::trace_all(model, N_SAMPLES, EPS).map_err(err)?;
    let mut worst = curve.all_samples().map(|s| s.residual).fold(0.0, f64::max);
    let mesh = tangent::sample_height(model, grid).map_err(err)?;
    for p in mesh.valid() {
        let f = model.field(if matches!(model, Model::Uniform) { cyl_of(p.u) } else { p.u }).map_err(err)?;
        worst = worst.max(tangent::tangency_residual(&f, p.x, p.y));
    }
    Ok(worst)
}

/// The uniform model reports u = z; map back to its sampling coordinate.
fn cyl_of(z: Complex64) -> Complex64 {
    z.atan() * (2.0 / PI)
}

fn check_tangency(tol: &Tolerances) -> Measured {
    let grid = GridSpec { nx: 64, ny: 32 };
    let r = calibrated(&CalibrateOptions::default())?;
    let models = [
        ("uniform", Model::Uniform),
        ("two-periodic", Model::TwoPeriodic(TwoPeriodic::from_b(0.5).map_err(err)?)),
        ("holey", Model::Holey(Holey::new(r.params).map_err(err)?)),
    ];
    let ms = models
        .iter()
        .map(|(name, model)| Ok(m(name, max_tangency_residual(model, grid)?, tol.tangency)))
        .collect::<Result<Vec<_>, String>>()?;
    Ok(ms.into())
}

pub fn run_check(id: u8, tol: &Tolerances) -> CheckReport {
    let (name, secs) = title(id);
    let start = Instant::now();
    let result = match id {
        1 => check_circle(tol),
        2 => check_inversion(tol),
        3 => check_elliptic(tol),
        4 => check_harmonicity(tol),
        5 => check_bubble(tol),
        6 => check_degeneration(tol),
        7 => check_calibration(tol),
        8 => check_uniqueness(tol),
        9 => check_symmetry(tol),
        10 => check_tangency(tol),
        _ => Err(format!("no check {id}")),
    };
    let elapsed = start.elapsed();
    let (measurements, notes, error) = match result {
        Ok(o) => (o.measurements, o.notes, None),
        Err(e) => (Vec::new(), Vec::new(), Some(e)),
    };
    CheckReport {
        id,
        title: name.into(),
        measurements,
        notes,
        error,
        elapsed,
        budget: Duration::from_secs_f64(secs as f64 * tol.time_factor),
    }
}

pub fn run_all(tol: &Tolerances) -> Vec<CheckReport> {
    CHECK_IDS.map(|id| run_check(id, tol)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_overrides() {
        let t = Tolerances::with_overrides([("ARCTIC_TOL_CIRCLE".to_string(), "1e-20".to_string())]).unwrap();
        assert_eq!(t.circle, 1e-20);
        assert_eq!(t.eta1, 1e-10);
        assert!(Tolerances::with_overrides([("ARCTIC_TOL_NOPE".to_string(), "1".to_string())]).is_err());
        assert!(Tolerances::with_overrides([("ARCTIC_TOL_CIRCLE".to_string(), "x".to_string())]).is_err());
    }

    #[test]
    fn nan_measurement_fails() {
        assert!(!m("x", f64::NAN, 1.0).passed());
    }
}
