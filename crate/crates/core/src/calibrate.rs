//! Critical points of z_u and c_u on the holey annulus and the nested fit
//! of (a, ϰ, τ).
//!
//! With the symmetric inner points, s is odd about Re u = 1/4 and even about
//! Re u = 3/4, so z_u = s_u is real on the first line and imaginary on the
//! second; c is even about both lines, so c_u is imaginary on both. Interior
//! critical points on these lines are therefore roots of one real function
//! of Im u, which the fit uses. [`find_critical_points`] locates zeros in the
//! plane without that assumption and is used to confirm it.
//!
//! The δ-free part of c is odd under u ↦ u + 1/2 while the −δ·Im u term is
//! not, so the two c_u roots can sit on the z_u critical line together only
//! at δ = 0. There the alignment holds for every τ once ϰ = ϰ(τ), and
//! [`fit_all`] selects τ by a target hole size.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::roots::{self, RootError};
use crate::scenarios::{Holey, HoleyParams, ScenarioError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrateError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error("no sign change of the {what} over the bracket; samples (x, gap): {samples:?}")]
    Bracket {
        what: &'static str,
        samples: Vec<(f64, f64)>,
    },
    #[error("expected {expected} critical points, found {found:?}")]
    Count { expected: usize, found: Vec<Complex64> },
    #[error("|cu2(u*)| = {value:.3e} at u* = {u} is too small to solve for kappa")]
    DegenerateDenominator { u: Complex64, value: f64 },
    #[error("kappa from Re u = 0.25 ({kappa1}) and from Re u = 0.75 ({kappa2}) differ: the two c_u roots cannot both meet the z_u critical line at delta = {delta}")]
    PartnerMismatch { kappa1: f64, kappa2: f64, delta: f64 },
    #[error("kappa ratio {ratio} is not real")]
    ComplexRatio { ratio: Complex64 },
    #[error("fitted {name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("at tau_im = {tau_im}: {source}")]
    AtTau {
        tau_im: f64,
        #[source]
        source: Box<CalibrateError>,
    },
}

pub type Result<T> = std::result::Result<T, CalibrateError>;

/// Tolerances and brackets of the fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrateOptions {
    /// Samples along Im u per symmetry line before root polishing.
    pub axis_samples: usize,
    /// Scan points for the a-bracket.
    pub a_scan: usize,
    pub a_bracket: (f64, f64),
    pub tau_bracket: (f64, f64),
    /// Bracket width at which the a- and τ-searches stop.
    pub xtol: f64,
    pub max_iter: usize,
    /// Hole size selecting τ inside the δ = 0 family.
    pub kappa_target: f64,
    /// Allowed difference between the two kappa ratios.
    pub partner_tol: f64,
}

impl Default for CalibrateOptions {
    fn default() -> Self {
        Self {
            axis_samples: 200,
            a_scan: 24,
            a_bracket: (1e-3, 0.25 - 1e-3),
            tau_bracket: (0.3, 3.0),
            xtol: 1e-12,
            max_iter: 200,
            kappa_target: 0.15,
            partner_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalTag {
    ZU,
    CU,
}

/// Zeros of one derivative inside a fundamental domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointSet {
    pub tag: CriticalTag,
    pub points: Vec<Complex64>,
    pub residuals: Vec<f64>,
}

/// Rectangle searched by [`find_critical_points`]; periodic in Re u with
/// period re_max − re_min when `periodic` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub periodic: bool,
}

fn wrap_angle(d: f64) -> f64 {
    let tp = 2.0 * std::f64::consts::PI;
    let mut r = d.rem_euclid(tp);
    if r > std::f64::consts::PI {
        r -= tp;
    }
    r
}

fn newton<F>(f: &F, mut u: Complex64, scale: f64) -> Option<(Complex64, f64)>
where
    F: Fn(Complex64) -> Option<Complex64>,
{
    let h = 1e-6 * scale;
    for _ in 0..60 {
        let fu = f(u)?;
        if fu.norm() < 1e-13 {
            return Some((u, fu.norm()));
        }
        let d = (f(u + h)? - f(u - h)?) / (2.0 * h);
        if !(d.norm() > 0.0) {
            return None;
        }
        let step = fu / d;
        u -= step;
        if step.norm() < 1e-15 * scale {
            break;
        }
    }
    let r = f(u)?.norm();
    Some((u, r))
}

/// Zeros of a holomorphic `f` in `region`: the argument principle on each
/// cell of an `nx × ny` grid flags candidates, Newton (central-difference
/// derivative) polishes them to |f| < 1e−12, and duplicates within 1e−6 are
/// merged. `f` returns `None` where it cannot be evaluated.
pub fn find_critical_points<F>(
    f: F,
    region: Region,
    expected_count: usize,
    grid: (usize, usize),
) -> Result<Vec<(Complex64, f64)>>
where
    F: Fn(Complex64) -> Option<Complex64> + Sync,
{
    let (nx, ny) = grid;
    let dx = (region.re_max - region.re_min) / nx as f64;
    let dy = (region.im_max - region.im_min) / ny as f64;
    let at = |j: usize, k: usize| Complex64::new(region.re_min + j as f64 * dx, region.im_min + k as f64 * dy);
    let vals: Vec<Option<f64>> = (0..(nx + 1) * (ny + 1))
        .into_par_iter()
        .map(|idx| f(at(idx % (nx + 1), idx / (nx + 1))).map(|v| v.arg()))
        .collect();
    let arg = |j: usize, k: usize| vals[k * (nx + 1) + j];
    let mut seeds = Vec::new();
    for k in 0..ny {
        for j in 0..nx {
            let corners = [arg(j, k), arg(j + 1, k), arg(j + 1, k + 1), arg(j, k + 1)];
            if corners.iter().any(|c| c.is_none()) {
                continue;
            }
            let c: Vec<f64> = corners.iter().map(|c| c.unwrap()).collect();
            let wind: f64 = (0..4).map(|i| wrap_angle(c[(i + 1) % 4] - c[i])).sum();
            if wind.abs() > 1.0 {
                seeds.push(at(j, k) + Complex64::new(0.5 * dx, 0.5 * dy));
            }
        }
    }
    let period = region.re_max - region.re_min;
    let scale = dx.max(dy);
    let polished: Vec<Option<(Complex64, f64)>> = seeds.par_iter().map(|&u| newton(&f, u, scale)).collect();
    let mut found: Vec<(Complex64, f64)> = Vec::new();
    for (mut u, r) in polished.into_iter().flatten() {
        if !(r < 1e-12) {
            continue;
        }
        if region.periodic {
            u.re = region.re_min + (u.re - region.re_min).rem_euclid(period);
        }
        let inside = u.re >= region.re_min - 1e-9
            && u.re <= region.re_max + 1e-9
            && u.im > region.im_min - dy
            && u.im < region.im_max + dy;
        if !inside {
            continue;
        }
        let dup = found.iter().any(|(v, _)| {
            let mut d = (u - v).norm();
            if region.periodic {
                d = d.min((u - v + period).norm()).min((u - v - period).norm());
            }
            d < 1e-6
        });
        if !dup {
            found.push((u, r));
        }
    }
    found.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    if found.len() != expected_count {
        return Err(CalibrateError::Count {
            expected: expected_count,
            found: found.into_iter().map(|p| p.0).collect(),
        });
    }
    Ok(found)
}

/// All z_u zeros of a holey model in [0, 1) × (0, Im τ) (s_u has period 1).
pub fn z_u_critical_points(model: &Holey, expected_count: usize, grid: (usize, usize)) -> Result<CriticalPointSet> {
    let h = model.params().tau_im;
    let region = Region {
        re_min: 0.0,
        re_max: 1.0,
        im_min: 0.01 * h,
        im_max: 0.99 * h,
        periodic: true,
    };
    let pts = find_critical_points(|u| model.z_u(u).ok(), region, expected_count, grid)?;
    Ok(CriticalPointSet {
        tag: CriticalTag::ZU,
        points: pts.iter().map(|p| p.0).collect(),
        residuals: pts.iter().map(|p| p.1).collect(),
    })
}

/// Roots in Im u ∈ (0, H) of `g(Im u)` sampled at `n` interior points.
fn line_roots<G>(g: G, h: f64, n: usize, xtol: f64) -> Vec<f64>
where
    G: Fn(f64) -> f64 + Sync,
{
    let lo = 1e-3 * h;
    let hi = h - 1e-3 * h;
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let vs: Vec<f64> = xs.par_iter().map(|&y| g(y)).collect();
    let mut out = Vec::new();
    let mut gm = |y: f64| g(y);
    for i in 0..n {
        let (fa, fb) = (vs[i], vs[i + 1]);
        if !fa.is_finite() || !fb.is_finite() || fa == fb {
            continue;
        }
        if fa == 0.0 {
            out.push(xs[i]);
        } else if (fa > 0.0) != (fb > 0.0) && fb != 0.0 {
            if let Ok(r) = roots::brent_with(&mut gm, xs[i], fa, xs[i + 1], fb, xtol, 200) {
                out.push(r.x);
            }
        }
    }
    out
}

/// Heights of z_u zeros on Re u = 1/4 (roots of Re s_u) and on Re u = 3/4
/// (roots of Im s_u).
pub fn z_u_line_heights(model: &Holey, opts: &CalibrateOptions) -> (Vec<f64>, Vec<f64>) {
    let h = model.params().tau_im;
    let ev = |u: Complex64| model.z_u(u).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
    let y1 = line_roots(|y| ev(Complex64::new(0.25, y)).re, h, opts.axis_samples, opts.xtol);
    let y2 = line_roots(|y| ev(Complex64::new(0.75, y)).im, h, opts.axis_samples, opts.xtol);
    (y1, y2)
}

/// Heights of c_u zeros on Re u = 1/4 and Re u = 3/4 (roots of Im c_u).
pub fn c_u_line_heights(model: &Holey, opts: &CalibrateOptions) -> (Vec<f64>, Vec<f64>) {
    let h = model.params().tau_im;
    let ev = |u: Complex64| model.c_u(u).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
    let y1 = line_roots(|y| ev(Complex64::new(0.25, y)).im, h, opts.axis_samples, opts.xtol);
    let y2 = line_roots(|y| ev(Complex64::new(0.75, y)).im, h, opts.axis_samples, opts.xtol);
    (y1, y2)
}

fn holey(a: f64, kappa: f64, tau_im: f64, delta: f64) -> Result<Holey> {
    Ok(Holey::new(HoleyParams { a, kappa, tau_im, delta })?)
}

/// s and c_u's ϰ-split do not depend on ϰ; this value only satisfies the
/// parameter check.
const KAPPA_PLACEHOLDER: f64 = 0.5;

/// Single z_u critical height on each symmetry line, or `None`.
fn z_line_pair(a: f64, tau_im: f64, delta: f64, opts: &CalibrateOptions) -> Result<Option<(f64, f64)>> {
    let m = holey(a, KAPPA_PLACEHOLDER, tau_im, delta)?;
    let (y1, y2) = z_u_line_heights(&m, opts);
    Ok(match (y1.as_slice(), y2.as_slice()) {
        ([p], [q]) => Some((*p, *q)),
        _ => None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitA {
    pub a: f64,
    /// Common height of the two z_u critical points.
    pub height: f64,
    pub gap: f64,
    pub bracket: (f64, f64),
}

/// a such that the z_u critical points on Re u = 1/4 and 3/4 have equal
/// height. Scans the a-bracket for the first sign change of the height gap
/// (where both points exist) and polishes it with Brent's method.
pub fn fit_a(tau_im: f64, delta: f64, opts: &CalibrateOptions) -> Result<FitA> {
    let (lo, hi) = opts.a_bracket;
    let n = opts.a_scan.max(2);
    let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let gaps: Vec<Option<f64>> = xs
        .iter()
        .map(|&a| Ok(z_line_pair(a, tau_im, delta, opts)?.map(|(p, q)| p - q)))
        .collect::<Result<_>>()?;
    let mut bracket = None;
    for i in 0..n - 1 {
        if let (Some(g0), Some(g1)) = (gaps[i], gaps[i + 1]) {
            if (g0 > 0.0) != (g1 > 0.0) {
                bracket = Some((i, g0, g1));
                break;
            }
        }
    }
    let Some((i, g0, g1)) = bracket else {
        return Err(CalibrateError::Bracket {
            what: "z_u critical height gap in a",
            samples: xs.iter().zip(&gaps).map(|(&x, g)| (x, g.unwrap_or(f64::NAN))).collect(),
        });
    };
    let mut g = |a: f64| match z_line_pair(a, tau_im, delta, opts) {
        Ok(Some((p, q))) => p - q,
        _ => f64::NAN,
    };
    let r = roots::brent_with(&mut g, xs[i], g0, xs[i + 1], g1, opts.xtol, opts.max_iter)?;
    let (p, q) = z_line_pair(r.x, tau_im, delta, opts)?.ok_or(CalibrateError::Count {
        expected: 2,
        found: vec![],
    })?;
    if !(r.x > 0.0 && r.x < 0.25) {
        return Err(CalibrateError::OutOfRange {
            name: "a",
            value: r.x,
            range: "(0, 1/4)",
        });
    }
    Ok(FitA {
        a: r.x,
        height: 0.5 * (p + q),
        gap: p - q,
        bracket: (xs[i], xs[i + 1]),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaFit {
    pub kappa: f64,
    /// z_u critical points on Re u = 1/4 and 3/4.
    pub u1: Complex64,
    pub u2: Complex64,
    /// Ratio −cu₁/cu₂ at u2.
    pub kappa_partner: f64,
}

fn kappa_ratio(model: &Holey, u: Complex64) -> Result<Complex64> {
    let (cu1, cu2) = model.c_u_parts(u)?;
    if !(cu2.norm() > 1e-10) {
        return Err(CalibrateError::DegenerateDenominator { u, value: cu2.norm() });
    }
    Ok(-cu1 / cu2)
}

/// ϰ(τ) = −cu₁(u*)/cu₂(u*) at the z_u critical point u* on Re u = 1/4. The
/// same ratio at the partner point on Re u = 3/4 must agree within
/// `partner_tol`, and the ratio must be real.
pub fn kappa_of_tau(tau_im: f64, a: f64, delta: f64, opts: &CalibrateOptions) -> Result<KappaFit> {
    let m = holey(a, KAPPA_PLACEHOLDER, tau_im, delta)?;
    let (y1, y2) = z_u_line_heights(&m, opts);
    let (&[p], &[q]) = (y1.as_slice(), y2.as_slice()) else {
        let found = y1
            .iter()
            .map(|&y| Complex64::new(0.25, y))
            .chain(y2.iter().map(|&y| Complex64::new(0.75, y)))
            .collect();
        return Err(CalibrateError::Count { expected: 2, found });
    };
    let u1 = Complex64::new(0.25, p);
    let u2 = Complex64::new(0.75, q);
    let k1 = kappa_ratio(&m, u1)?;
    let k2 = kappa_ratio(&m, u2)?;
    for k in [k1, k2] {
        if k.im.abs() > 1e-8 * k.norm().max(1.0) {
            return Err(CalibrateError::ComplexRatio { ratio: k });
        }
    }
    if (k1.re - k2.re).abs() > opts.partner_tol {
        return Err(CalibrateError::PartnerMismatch {
            kappa1: k1.re,
            kappa2: k2.re,
            delta,
        });
    }
    if !(k1.re > 0.0 && k1.re < 1.0) {
        return Err(CalibrateError::OutOfRange {
            name: "kappa",
            value: k1.re,
            range: "(0, 1)",
        });
    }
    Ok(KappaFit {
        kappa: k1.re,
        u1,
        u2,
        kappa_partner: k2.re,
    })
}

/// Height of the c_u root on Re u = 1/4 nearest to `target`, minus `target`.
fn c_root_gap(tau_im: f64, a: f64, delta: f64, kappa: f64, target: f64, opts: &CalibrateOptions) -> Result<Option<f64>> {
    let m = holey(a, kappa, tau_im, delta)?;
    let (yc, _) = c_u_line_heights(&m, opts);
    Ok(yc
        .iter()
        .map(|y| y - target)
        .min_by(|x, y| x.abs().total_cmp(&y.abs())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessScan {
    /// z_u critical height the gaps are measured from.
    pub z_height: f64,
    /// (ϰ, gap); gap is NaN where no c_u root exists on the line.
    pub rows: Vec<(f64, f64)>,
    /// Per-row failures (ϰ, message); the scan continues past them.
    pub failures: Vec<(f64, String)>,
    pub sign_changes: usize,
}

/// Gap between the c_u root on Re u = 1/4 and the z_u critical height as a
/// function of ϰ at fixed (τ, a, δ).
pub fn uniqueness_scan(tau_im: f64, a: f64, delta: f64, kappa_grid: &[f64], opts: &CalibrateOptions) -> Result<UniquenessScan> {
    let m = holey(a, KAPPA_PLACEHOLDER, tau_im, delta)?;
    let (y1, _) = z_u_line_heights(&m, opts);
    let &[z_height] = y1.as_slice() else {
        return Err(CalibrateError::Count {
            expected: 1,
            found: y1.iter().map(|&y| Complex64::new(0.25, y)).collect(),
        });
    };
    let results: Vec<Result<Option<f64>>> = kappa_grid
        .par_iter()
        .map(|&k| c_root_gap(tau_im, a, delta, k, z_height, opts))
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (&k, r) in kappa_grid.iter().zip(results) {
        match r {
            Ok(g) => rows.push((k, g.unwrap_or(f64::NAN))),
            Err(e) => {
                rows.push((k, f64::NAN));
                failures.push((k, e.to_string()));
            }
        }
    }
    let finite: Vec<f64> = rows.iter().map(|r| r.1).filter(|g| g.is_finite()).collect();
    let sign_changes = finite.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count();
    Ok(UniquenessScan {
        z_height,
        rows,
        failures,
        sign_changes,
    })
}

/// ϰ by direct root solve: the c_u root on Re u = 1/4 meets the z_u
/// critical height. Independent of the ratio formula.
pub fn kappa_by_alignment(tau_im: f64, a: f64, delta: f64, opts: &CalibrateOptions) -> Result<f64> {
    let grid: Vec<f64> = (0..50).map(|i| (i as f64 + 0.5) / 50.0).collect();
    let scan = uniqueness_scan(tau_im, a, delta, &grid, opts)?;
    let target = scan.z_height;
    let pair = scan
        .rows
        .windows(2)
        .find(|w| w[0].1.is_finite() && w[1].1.is_finite() && (w[0].1 > 0.0) != (w[1].1 > 0.0));
    let Some(w) = pair else {
        return Err(CalibrateError::Bracket {
            what: "c_u root gap in kappa",
            samples: scan.rows.clone(),
        });
    };
    let mut g = |k: f64| {
        c_root_gap(tau_im, a, delta, k, target, opts)
            .ok()
            .flatten()
            .unwrap_or(f64::NAN)
    };
    let r = roots::brent_with(&mut g, w[0].0, w[0].1, w[1].0, w[1].1, opts.xtol, opts.max_iter)?;
    Ok(r.x)
}

/// Output of [`fit_all`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub params: HoleyParams,
    pub kappa_target: f64,
    /// Largest height difference among the z_u critical points and the c_u
    /// roots on both symmetry lines, recomputed at the fitted parameters.
    pub alignment_residual: f64,
    /// Steps of the τ search.
    pub iterations: usize,
    pub critical_points: Vec<Complex64>,
    pub c_roots: Vec<Complex64>,
}

impl CalibrationResult {
    /// {delta, a, kappa, tau_im, residual, iterations, critical_points}.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "delta": self.params.delta,
            "a": self.params.a,
            "kappa": self.params.kappa,
            "tau_im": self.params.tau_im,
            "kappa_target": self.kappa_target,
            "residual": self.alignment_residual,
            "iterations": self.iterations,
            "critical_points": self.critical_points.iter().map(|u| [u.re, u.im]).collect::<Vec<_>>(),
            "c_roots": self.c_roots.iter().map(|u| [u.re, u.im]).collect::<Vec<_>>(),
        })
    }
}

fn at_tau<T>(tau_im: f64, r: Result<T>) -> Result<T> {
    r.map_err(|e| CalibrateError::AtTau {
        tau_im,
        source: Box::new(e),
    })
}

/// (a, ϰ) at one τ: z_u lines aligned, then ϰ from the ratio.
pub fn fit_at_tau(tau_im: f64, delta: f64, opts: &CalibrateOptions) -> Result<(FitA, KappaFit)> {
    let fa = at_tau(tau_im, fit_a(tau_im, delta, opts))?;
    let kf = at_tau(tau_im, kappa_of_tau(tau_im, fa.a, delta, opts))?;
    Ok((fa, kf))
}

/// Full scheme: Brent search (bisection fallback) on Im τ in the τ-bracket
/// for ϰ(τ) = kappa_target, recomputing a and ϰ at every step.
pub fn fit_all(delta: f64, opts: &CalibrateOptions) -> Result<CalibrationResult> {
    if !(delta >= 0.0) {
        return Err(CalibrateError::OutOfRange {
            name: "delta",
            value: delta,
            range: "[0, inf)",
        });
    }
    let (lo, hi) = opts.tau_bracket;
    let gap = |h: f64| -> Result<f64> { Ok(fit_at_tau(h, delta, opts)?.1.kappa - opts.kappa_target) };
    let g_lo = gap(lo)?;
    let g_hi = gap(hi)?;
    if (g_lo > 0.0) == (g_hi > 0.0) {
        let samples = (0..=6)
            .map(|i| {
                let h = lo + (hi - lo) * i as f64 / 6.0;
                (h, gap(h).unwrap_or(f64::NAN))
            })
            .collect();
        return Err(CalibrateError::Bracket {
            what: "kappa(tau) - kappa_target",
            samples,
        });
    }
    let mut first_err = None;
    let mut g = |h: f64| match gap(h) {
        Ok(v) => v,
        Err(e) => {
            first_err.get_or_insert(e);
            f64::NAN
        }
    };
    let root = roots::brent_with(&mut g, lo, g_lo, hi, g_hi, opts.xtol, opts.max_iter);
    if let Some(e) = first_err {
        return Err(e);
    }
    let root = root?;
    let tau_im = root.x;
    let (fa, kf) = fit_at_tau(tau_im, delta, opts)?;
    let params = HoleyParams {
        a: fa.a,
        kappa: kf.kappa,
        tau_im,
        delta,
    };
    let m = Holey::new(params)?;
    let (z1, z2) = z_u_line_heights(&m, opts);
    let (c1, c2) = c_u_line_heights(&m, opts);
    let (&[p], &[q]) = (z1.as_slice(), z2.as_slice()) else {
        return Err(CalibrateError::Count {
            expected: 2,
            found: z1.iter().chain(&z2).map(|&y| Complex64::new(0.0, y)).collect(),
        });
    };
    let nearest = |ys: &[f64], y: f64| {
        ys.iter()
            .copied()
            .min_by(|a, b| (a - y).abs().total_cmp(&(b - y).abs()))
            .unwrap_or(f64::NAN)
    };
    let yc1 = nearest(&c1, p);
    let yc2 = nearest(&c2, q);
    let residual = [(p - q).abs(), (yc1 - p).abs(), (yc2 - q).abs()]
        .into_iter()
        .fold(0.0, |m: f64, x| if x.is_nan() { f64::NAN } else { m.max(x) });
    Ok(CalibrationResult {
        params,
        kappa_target: opts.kappa_target,
        alignment_residual: residual,
        iterations: root.iterations,
        critical_points: vec![Complex64::new(0.25, p), Complex64::new(0.75, q)],
        c_roots: vec![Complex64::new(0.25, yc1), Complex64::new(0.75, yc2)],
    })
}
