//! Bracketed one-dimensional root finding.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("no sign change on [{a}, {b}]: f(a) = {fa:.6e}, f(b) = {fb:.6e}")]
    NoSignChange { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("non-finite function value {fx} at x = {x}")]
    NotFinite { x: f64, fx: f64 },
    #[error("no convergence after {iterations} iterations (bracket width {width:.3e})")]
    MaxIter { iterations: usize, width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Brent's method: inverse quadratic / secant steps with bisection fallback.
/// Stops when the bracket is narrower than `xtol` or f vanishes.
pub fn brent<F>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> Result<Root, RootError>
where
    F: FnMut(f64) -> f64,
{
    let fa0 = f(a);
    let fb0 = f(b);
    brent_with(&mut f, a, fa0, b, fb0, xtol, max_iter)
}

/// [`brent`] with both endpoint values already known.
pub fn brent_with<F>(
    f: &mut F,
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    mut fb: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<Root, RootError>
where
    F: FnMut(f64) -> f64,
{
    for (x, fx) in [(a, fa), (b, fb)] {
        if !fx.is_finite() {
            return Err(RootError::NotFinite { x, fx });
        }
    }
    if fa == 0.0 {
        return Ok(Root { x: a, fx: fa, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: fb, iterations: 0 });
    }
    if (fa > 0.0) == (fb > 0.0) {
        return Err(RootError::NoSignChange { a, b, fa, fb });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for it in 1..=max_iter {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(Root { x: b, fx: fb, iterations: it });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(RootError::NotFinite { x: b, fx: fb });
        }
    }
    Err(RootError::MaxIter {
        iterations: max_iter,
        width: (c - b).abs(),
    })
}

/// Scans `n` equal steps of [lo, hi] and polishes every sign change with
/// [`brent`]. Non-finite samples break brackets instead of producing roots.
pub fn scan_roots<F>(mut f: F, lo: f64, hi: f64, n: usize, xtol: f64) -> Vec<f64>
where
    F: FnMut(f64) -> f64,
{
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut out = Vec::new();
    for i in 0..n {
        let (fa, fb) = (vs[i], vs[i + 1]);
        if !fa.is_finite() || !fb.is_finite() {
            continue;
        }
        if fa == 0.0 {
            out.push(xs[i]);
            continue;
        }
        if (fa > 0.0) != (fb > 0.0) && fb != 0.0 {
            if let Ok(r) = brent_with(&mut f, xs[i], fa, xs[i + 1], fb, xtol, 200) {
                out.push(r.x);
            }
        }
    }
    out
}
