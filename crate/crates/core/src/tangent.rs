//! Tangent-plane equation s_u·x + t_u·y + c_u = 0: pointwise solves, arctic
//! curve tracing and height reconstruction h = s·x + t·y + c.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harmonic::Component;
use crate::scenarios::{FieldSample, Holey, HoleyParams, Model, ScenarioError};

/// Smallest accepted |det| of the normalized 2×2 system.
pub const DEGENERATE_DET: f64 = 1e-12;

/// Fraction of dropped samples above which tracing emits a warning.
pub const DEGENERATE_WARN_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TangentError {
    #[error("degenerate tangent system at u = {u}: |det| = {det:.3e}")]
    Degenerate { u: Complex64, det: f64 },
    #[error("({x}, {y}) is outside the domain: {reason}")]
    Domain { x: f64, y: f64, reason: String },
    #[error("component {0} does not exist for this model")]
    NoComponent(Component),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

pub type Result<T> = std::result::Result<T, TangentError>;

/// Solves Re/Im(s_u·x + t_u·y + c_u) = 0. The system is first divided by
/// max(|s_u|, |t_u|), so the returned determinant is scale-free and the
/// solution is invariant under a common complex rescaling.
pub fn solve_point(sample: &FieldSample) -> Result<(f64, f64, f64)> {
    let scale = sample.ds_du.norm().max(sample.dt_du.norm());
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(TangentError::Degenerate { u: sample.u, det: 0.0 });
    }
    let a = sample.ds_du / scale;
    let b = sample.dt_du / scale;
    let c = sample.dc_du / scale;
    let det = a.re * b.im - b.re * a.im;
    if !(det.abs() >= DEGENERATE_DET) {
        return Err(TangentError::Degenerate { u: sample.u, det: det.abs() });
    }
    let x = (-c.re * b.im + b.re * c.im) / det;
    let y = (-a.re * c.im + c.re * a.im) / det;
    Ok((x, y, det.abs()))
}

/// |s_u·x + t_u·y + c_u| with the unscaled derivatives.
pub fn tangency_residual(sample: &FieldSample, x: f64, y: f64) -> f64 {
    (sample.ds_du * x + sample.dt_du * y + sample.dc_du).norm()
}

/// Inverse of the uniform parametrization:
/// z(x, y) = (1 − 2x + i·√(1 − (2x−1)² − (2y−1)²)) / (2y).
pub fn invert_uniform(x: f64, y: f64) -> Result<Complex64> {
    let disc = 1.0 - (2.0 * x - 1.0).powi(2) - (2.0 * y - 1.0).powi(2);
    if !(y > 0.0) || !(disc >= -1e-12) {
        return Err(TangentError::Domain {
            x,
            y,
            reason: "the point is outside the arctic circle".into(),
        });
    }
    Ok(Complex64::new(1.0 - 2.0 * x, disc.max(0.0).sqrt()) / (2.0 * y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub u: Complex64,
    pub x: f64,
    pub y: f64,
    pub component: Component,
    pub det: f64,
    /// |s_u·x + t_u·y + c_u| at this sample.
    pub residual: f64,
}

/// Samples of one boundary component, ordered by Re u.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePiece {
    pub component: Component,
    pub samples: Vec<CurveSample>,
    /// Sampling points dropped as degenerate.
    pub dropped: Vec<Complex64>,
    pub requested: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcticCurve {
    pub pieces: Vec<CurvePiece>,
    pub warnings: Vec<String>,
}

impl ArcticCurve {
    pub fn all_samples(&self) -> impl Iterator<Item = &CurveSample> {
        self.pieces.iter().flat_map(|p| p.samples.iter())
    }

    pub fn piece(&self, comp: Component) -> Option<&CurvePiece> {
        self.pieces.iter().find(|p| p.component == comp)
    }
}

enum Solved {
    Kept(CurveSample),
    Dropped(Complex64),
}

/// Traces one boundary component at distance `eps` inside the domain with
/// `n` samples at the midpoints of n equal steps of one period.
pub fn trace_curve(model: &Model, component: Component, n: usize, eps: f64) -> Result<CurvePiece> {
    let dom = model.domain();
    if !dom.components.contains(&component) {
        return Err(TangentError::NoComponent(component));
    }
    let im = match component {
        Component::Outer => eps,
        Component::Inner => dom.im_max - eps,
    };
    let solved: Vec<Result<Solved>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let u = Complex64::new(dom.re_min + (j as f64 + 0.5) * dom.period / n as f64, im);
            let f = model.field(u)?;
            match solve_point(&f) {
                Ok((x, y, det)) => Ok(Solved::Kept(CurveSample {
                    u: f.u,
                    x,
                    y,
                    component,
                    det,
                    residual: tangency_residual(&f, x, y),
                })),
                Err(TangentError::Degenerate { .. }) => Ok(Solved::Dropped(u)),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut samples = Vec::with_capacity(n);
    let mut dropped = Vec::new();
    for r in solved {
        match r? {
            Solved::Kept(s) => samples.push(s),
            Solved::Dropped(u) => dropped.push(u),
        }
    }
    Ok(CurvePiece {
        component,
        samples,
        dropped,
        requested: n,
    })
}

/// Traces every boundary component of the model.
pub fn trace_all(model: &Model, n: usize, eps: f64) -> Result<ArcticCurve> {
    let mut pieces = Vec::new();
    let mut warnings = Vec::new();
    for comp in model.domain().components {
        let p = trace_curve(model, comp, n, eps)?;
        if p.dropped.len() as f64 > DEGENERATE_WARN_FRACTION * n as f64 {
            let shown: Vec<String> = p.dropped.iter().take(10).map(|u| format!("{u}")).collect();
            warnings.push(format!(
                "{comp}: {} of {n} samples degenerate, e.g. at {}",
                p.dropped.len(),
                shown.join(", ")
            ));
        }
        pieces.push(p);
    }
    Ok(ArcticCurve { pieces, warnings })
}

/// Mesh resolution in the conformal coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshPoint {
    pub u: Complex64,
    pub x: f64,
    pub y: f64,
    pub h: f64,
    pub s: f64,
    pub t: f64,
}

/// Row-major grid (row k = height index) of envelope points; `None` marks
/// degenerate cells. Rows are periodic in the horizontal direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightMesh {
    pub nx: usize,
    pub ny: usize,
    pub points: Vec<Option<MeshPoint>>,
}

impl HeightMesh {
    pub fn get(&self, j: usize, k: usize) -> Option<&MeshPoint> {
        self.points[k * self.nx + (j % self.nx)].as_ref()
    }

    pub fn valid(&self) -> impl Iterator<Item = &MeshPoint> {
        self.points.iter().flatten()
    }

    pub fn dropped(&self) -> usize {
        self.points.iter().filter(|p| p.is_none()).count()
    }
}

/// Envelope point of the model at u: (x, y) from the tangent equation and
/// h = s·x + t·y + c.
pub fn envelope_point(model: &Model, u: Complex64) -> Result<MeshPoint> {
    let f = model.field(u)?;
    let (x, y, _) = solve_point(&f)?;
    Ok(MeshPoint {
        u: f.u,
        x,
        y,
        h: f.s * x + f.t * y + f.c,
        s: f.s,
        t: f.t,
    })
}

/// Samples the envelope on a grid uniform in the conformal coordinate:
/// u = re_min + j·period/nx + i·(k + 1/2)·im_max/ny.
pub fn sample_height(model: &Model, grid: GridSpec) -> Result<HeightMesh> {
    let dom = model.domain();
    let (nx, ny) = (grid.nx, grid.ny);
    let pts: Vec<Result<Option<MeshPoint>>> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let (k, j) = (idx / nx, idx % nx);
            let u = Complex64::new(
                dom.re_min + j as f64 * dom.period / nx as f64,
                (k as f64 + 0.5) * dom.im_max / ny as f64,
            );
            match envelope_point(model, u) {
                Ok(p) => Ok(Some(p)),
                Err(TangentError::Degenerate { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let points = pts.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(HeightMesh { nx, ny, points })
}

/// Least-squares plane through the mesh neighbours (8-neighbourhood,
/// periodic in j) of point (j, k); returns its (∂h/∂x, ∂h/∂y).
pub fn fitted_slope(mesh: &HeightMesh, j: usize, k: usize) -> Option<(f64, f64)> {
    let p0 = mesh.get(j, k)?;
    let (mut sxx, mut sxy, mut syy, mut sxh, mut syh) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut n = 0;
    for dk in -1i64..=1 {
        let kk = k as i64 + dk;
        if kk < 0 || kk >= mesh.ny as i64 {
            continue;
        }
        for dj in -1i64..=1 {
            if dj == 0 && dk == 0 {
                continue;
            }
            let jj = (j as i64 + dj).rem_euclid(mesh.nx as i64) as usize;
            if let Some(p) = mesh.get(jj, kk as usize) {
                let (dx, dy, dh) = (p.x - p0.x, p.y - p0.y, p.h - p0.h);
                sxx += dx * dx;
                sxy += dx * dy;
                syy += dy * dy;
                sxh += dx * dh;
                syh += dy * dh;
                n += 1;
            }
        }
    }
    let det = sxx * syy - sxy * sxy;
    if n < 3 || !(det.abs() > 1e-30) {
        return None;
    }
    Some(((syy * sxh - sxy * syh) / det, (sxx * syh - sxy * sxh) / det))
}

/// Height change r = h(0.125 + 0.999τ) − h(0.125 + 0.001τ).
pub fn height_change(params: &HoleyParams) -> Result<f64> {
    let model = Model::Holey(Holey::new(*params)?);
    let tau = params.tau();
    let inner = envelope_point(&model, 0.125 + 0.999 * tau)?;
    let outer = envelope_point(&model, 0.125 + 0.001 * tau)?;
    Ok(inner.h - outer.h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::uniform_field;

    #[test]
    fn uniform_center() {
        let f = uniform_field(Complex64::new(0.0, 1.0)).unwrap();
        let (x, y, _) = solve_point(&f).unwrap();
        assert!((x - 0.5).abs() < 1e-14 && (y - 0.5).abs() < 1e-14);
    }

    #[test]
    fn invert_center_and_outside() {
        let z = invert_uniform(0.5, 0.5).unwrap();
        assert!((z - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(invert_uniform(0.02, 0.02).is_err());
    }

    #[test]
    fn degenerate_system_is_reported() {
        let f = FieldSample {
            u: Complex64::new(0.0, 1.0),
            s: 0.0,
            t: 0.0,
            c: 0.0,
            ds_du: Complex64::new(1.0, 1.0),
            dt_du: Complex64::new(2.0, 2.0),
            dc_du: Complex64::new(0.0, 1.0),
        };
        assert!(matches!(solve_point(&f), Err(TangentError::Degenerate { .. })));
    }
}
