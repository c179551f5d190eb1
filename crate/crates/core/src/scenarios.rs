//! The three Aztec diamond models as field evaluators, plus spectral-curve
//! utilities.
//!
//! Slope normalizations differ by model: the uniform diamond uses the 1×1
//! fundamental domain with (s, t) ∈ [0, 1]², the two-periodic and holey
//! diamonds use the 2×2 domain with (s, t) in the diamond |s| + |t| ≤ 1.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elliptic::{EllipticError, Lattice};
use crate::harmonic::{
    extend_table, BoundarySegment, BoundaryTable, Component, ExtensionFn, HarmonicError,
};
use crate::roots;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("point {u} is outside the domain: {reason}")]
    Domain { u: Complex64, reason: String },
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("point (z = {z}, w = {w}) is not on the spectral curve: |P| = {residual:.3e}")]
    OffCurve { z: Complex64, w: Complex64, residual: f64 },
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

/// (s, t, c) and their Wirtinger derivatives at one conformal point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub u: Complex64,
    pub s: f64,
    pub t: f64,
    pub c: f64,
    pub ds_du: Complex64,
    pub dt_du: Complex64,
    pub dc_du: Complex64,
}

/// Uniform Aztec diamond boundary table in the half-plane coordinate z:
/// (from, to, s, t, c) on the four real intervals.
pub const UNIFORM_TABLE: [(f64, f64, f64, f64, f64); 4] = [
    (f64::NEG_INFINITY, -1.0, 1.0, 0.0, 0.0),
    (-1.0, 0.0, 0.0, 0.0, 1.0),
    (0.0, 1.0, 0.0, 1.0, 0.0),
    (1.0, f64::INFINITY, 1.0, 1.0, 0.0),
];

/// Uniform diamond on the upper half-plane:
/// s = 1 − (1/π)(arg(z−1) − arg(z+1)), t = 1 − (1/π)arg z,
/// c = (1/π)(arg z − arg(z+1)), with
/// 2iπ s_z = −2/(z²−1), 2iπ t_z = −1/z, 2iπ c_z = 1/(z(z+1)).
pub fn uniform_field(z: Complex64) -> Result<FieldSample> {
    if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(ScenarioError::Domain {
            u: z,
            reason: "the uniform field needs Im z > 0".into(),
        });
    }
    let one = Complex64::new(1.0, 0.0);
    let s = 1.0 - ((z - one).arg() - (z + one).arg()) / PI;
    let t = 1.0 - z.arg() / PI;
    let c = (z.arg() - (z + one).arg()) / PI;
    let k = 2.0 * I * PI;
    Ok(FieldSample {
        u: z,
        s,
        t,
        c,
        ds_du: -2.0 / (z * z - one) / k,
        dt_du: -one / z / k,
        dc_du: one / (z * (z + one)) / k,
    })
}

/// Uniform diamond on the cylinder ζ = (2/π)·arctan z, 2-periodic in Re ζ.
pub fn uniform_field_cylinder(zeta: Complex64) -> Result<FieldSample> {
    if !(zeta.im > 0.0) || !zeta.re.is_finite() {
        return Err(ScenarioError::Domain {
            u: zeta,
            reason: "the cylinder field needs Im zeta > 0".into(),
        });
    }
    let w = Complex64::new(zeta.re.rem_euclid(2.0), zeta.im);
    let arg = PI * w / 2.0;
    if arg.cos().norm() < 1e-12 {
        return Err(ScenarioError::Domain {
            u: zeta,
            reason: "too close to the pole of tan at zeta = 1".into(),
        });
    }
    let z = arg.tan();
    let f = uniform_field(z)?;
    let dz = PI / 2.0 * (1.0 + z * z);
    Ok(FieldSample {
        u: zeta,
        ds_du: f.ds_du * dz,
        dt_du: f.dt_du * dz,
        dc_du: f.dc_du * dz,
        ..f
    })
}

/// Outer-boundary table of the two-periodic and holey diamonds.
pub const AZTEC_OUTER: [(f64, f64, f64, f64, f64); 4] = [
    (-0.5, 0.0, 1.0, 0.0, -0.5),
    (0.0, 0.5, 0.0, -1.0, 0.5),
    (0.5, 1.0, -1.0, 0.0, -0.5),
    (1.0, 1.5, 0.0, 1.0, 0.5),
];

fn outer_segments() -> Vec<BoundarySegment> {
    AZTEC_OUTER
        .iter()
        .map(|&(a, b, s, t, c)| BoundarySegment::new(Component::Outer, a, b, s, t, c))
        .collect()
}

/// Two-periodic Aztec diamond on the annulus 0 < Im ζ < Im τ; the inner
/// circle is the gas bubble with tangent plane 0.
#[derive(Debug, Clone)]
pub struct TwoPeriodic {
    table: BoundaryTable,
    s: ExtensionFn,
    t: ExtensionFn,
    c: ExtensionFn,
}

impl TwoPeriodic {
    pub fn table(tau_im: f64) -> BoundaryTable {
        BoundaryTable {
            tau_im,
            delta: 0.0,
            constant: 0.0,
            segments: outer_segments(),
        }
    }

    pub fn from_tau(tau_im: f64) -> Result<Self> {
        let table = Self::table(tau_im);
        let (s, t, c) = extend_table(&table)?;
        Ok(Self { table, s, t, c })
    }

    /// Lattice whose complementary modulus satisfies k' = b².
    pub fn from_b(b: f64) -> Result<Self> {
        Self::from_tau(tau_im_from_b(b)?)
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        self.s.lattice()
    }

    pub fn tau_im(&self) -> f64 {
        self.table.tau_im
    }

    /// b = √k'.
    pub fn b(&self) -> Result<f64> {
        Ok(self.lattice().k_prime()?.re.sqrt())
    }

    pub fn boundary_table(&self) -> &BoundaryTable {
        &self.table
    }

    pub fn extensions(&self) -> (&ExtensionFn, &ExtensionFn, &ExtensionFn) {
        (&self.s, &self.t, &self.c)
    }

    pub fn field(&self, zeta: Complex64) -> Result<FieldSample> {
        eval_extensions(zeta, &self.s, &self.t, &self.c)
    }
}

/// Im τ with √k'(τ) = b, for 0 < b < 1.
pub fn tau_im_from_b(b: f64) -> Result<f64> {
    if !(b > 0.0 && b < 1.0) {
        return Err(ScenarioError::Params(format!("b must lie in (0, 1), got {b}")));
    }
    let target = b * b;
    let f = |h: f64| -> f64 {
        match Lattice::imaginary(h).and_then(|l| l.k_prime()) {
            Ok(k) => k.re - target,
            Err(_) => f64::NAN,
        }
    };
    let r = roots::brent(f, 0.05, 20.0, 1e-14, 200)
        .map_err(|e| ScenarioError::Params(format!("no lattice with b = {b}: {e}")))?;
    Ok(r.x)
}

fn eval_extensions(u: Complex64, s: &ExtensionFn, t: &ExtensionFn, c: &ExtensionFn) -> Result<FieldSample> {
    Ok(FieldSample {
        u,
        s: s.value(u)?,
        t: t.value(u)?,
        c: c.value(u)?,
        ds_du: s.derivative(u)?,
        dt_du: t.derivative(u)?,
        dc_du: c.derivative(u)?,
    })
}

/// Parameters of the Aztec diamond with a hole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleyParams {
    /// Cusp spacing: inner points τ + {−1/2−a, −1/2, −1/2+a} + k/2.
    pub a: f64,
    /// Hole size ϰ.
    pub kappa: f64,
    /// τ = i·tau_im.
    pub tau_im: f64,
    /// Height-change tilt δ.
    pub delta: f64,
}

impl HoleyParams {
    pub fn tau(&self) -> Complex64 {
        Complex64::new(0.0, self.tau_im)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a < 0.25) {
            return Err(ScenarioError::Params(format!("a must lie in (0, 1/4), got {}", self.a)));
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(ScenarioError::Params(format!(
                "kappa must lie in (0, 1), got {}",
                self.kappa
            )));
        }
        if !(self.tau_im > 0.0) || !self.tau_im.is_finite() {
            return Err(ScenarioError::Params(format!(
                "tau_im must be positive, got {}",
                self.tau_im
            )));
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(ScenarioError::Params(format!("delta must be >= 0, got {}", self.delta)));
        }
        Ok(())
    }

    /// The twelve inner points as offsets from τ, increasing, in [−1/2−a, 1+a].
    pub fn inner_points(&self) -> [f64; 12] {
        let a = self.a;
        let mut p = [0.0; 12];
        for k in 0..4 {
            let base = -0.5 + 0.5 * k as f64;
            p[3 * k] = base - a;
            p[3 * k + 1] = base;
            p[3 * k + 2] = base + a;
        }
        p
    }
}

/// Inner-circle s values on (a₁,a₂), …, (a₁₂, a₁+2) induced by the
/// σ-product form of s.
pub const HOLEY_S_INNER: [f64; 12] = [-1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0];

/// Inner-circle c values in units of ϰ. The first six are the listed ones;
/// the rest repeat them with period 1.
pub const HOLEY_C_INNER: [f64; 12] = [0.5, -0.5, -1.5, -0.5, 0.5, 1.5, 0.5, -0.5, -1.5, -0.5, 0.5, 1.5];

/// Aztec diamond with a hole on the annulus 0 < Im u < Im τ.
#[derive(Debug, Clone)]
pub struct Holey {
    params: HoleyParams,
    table: BoundaryTable,
    s: ExtensionFn,
    t: ExtensionFn,
    c: ExtensionFn,
    /// c at ϰ = 0 (outer data and the δ term).
    c_fixed: ExtensionFn,
    /// Inner c data at ϰ = 1.
    c_unit: ExtensionFn,
}

impl Holey {
    pub fn table(params: &HoleyParams) -> BoundaryTable {
        let p = params.inner_points();
        let mut segments = outer_segments();
        for j in 0..12 {
            let start = p[j];
            let end = if j < 11 { p[j + 1] } else { p[0] + 2.0 };
            let mut seg = BoundarySegment::new(
                Component::Inner,
                start,
                end,
                HOLEY_S_INNER[j],
                HOLEY_S_INNER[(j + 3) % 12],
                params.kappa * HOLEY_C_INNER[j],
            );
            seg.inferred = j >= 6;
            segments.push(seg);
        }
        BoundaryTable {
            tau_im: params.tau_im,
            delta: params.delta,
            constant: 0.0,
            segments,
        }
    }

    pub fn new(params: HoleyParams) -> Result<Self> {
        params.validate()?;
        let table = Self::table(&params);
        check_quarter_symmetry(&table)?;
        let (s, t, c) = extend_table(&table)?;
        let lat = s.lattice().clone();
        let mut c_fixed = ExtensionFn::new(lat.clone());
        let mut c_unit = ExtensionFn::new(lat);
        for seg in &table.segments {
            match seg.component {
                Component::Outer => c_fixed.add_segment(seg.component, seg.start, seg.len, seg.c)?,
                Component::Inner => c_unit.add_segment(seg.component, seg.start, seg.len, seg.c / params.kappa)?,
            }
        }
        c_fixed.add_linear(-params.delta);
        Ok(Self {
            params,
            table,
            s,
            t,
            c,
            c_fixed,
            c_unit,
        })
    }

    pub fn params(&self) -> &HoleyParams {
        &self.params
    }

    pub fn boundary_table(&self) -> &BoundaryTable {
        &self.table
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        self.s.lattice()
    }

    pub fn extensions(&self) -> (&ExtensionFn, &ExtensionFn, &ExtensionFn) {
        (&self.s, &self.t, &self.c)
    }

    pub fn field(&self, u: Complex64) -> Result<FieldSample> {
        eval_extensions(u, &self.s, &self.t, &self.c)
    }

    /// z(u) = exp(G(u)) with Im G = π·s: the meromorphic function whose
    /// argument is π·s(u).
    pub fn z_of_u(&self, u: Complex64) -> Result<Complex64> {
        Ok(self.s.holomorphic(u)?.exp())
    }

    /// s_u; its zeros are the critical points of z(u).
    pub fn z_u(&self, u: Complex64) -> Result<Complex64> {
        Ok(self.s.derivative(u)?)
    }

    pub fn c_u(&self, u: Complex64) -> Result<Complex64> {
        Ok(self.c.derivative(u)?)
    }

    /// (cu₁, cu₂) with c_u = cu₁ + ϰ·cu₂.
    pub fn c_u_parts(&self, u: Complex64) -> Result<(Complex64, Complex64)> {
        Ok((self.c_fixed.derivative(u)?, self.c_unit.derivative(u)?))
    }

    /// w(u) = z(u + 1/2): the function whose argument is π·t(u).
    pub fn w_of_u(&self, u: Complex64) -> Result<Complex64> {
        self.z_of_u(u + 0.5)
    }
}

/// Inner points must satisfy a_{i+3} = a_i + 1/2.
fn check_quarter_symmetry(table: &BoundaryTable) -> Result<()> {
    let starts: Vec<f64> = table.component(Component::Inner).map(|s| s.start).collect();
    if starts.len() != 12 {
        return Err(ScenarioError::Params(format!(
            "holey table needs 12 inner segments, got {}",
            starts.len()
        )));
    }
    for i in 0..9 {
        if (starts[i + 3] - starts[i] - 0.5).abs() > 1e-12 {
            return Err(ScenarioError::Params(format!(
                "inner points {} and {} are not 1/2 apart",
                starts[i],
                starts[i + 3]
            )));
        }
    }
    Ok(())
}

/// Scenario defined by a user boundary table.
#[derive(Debug, Clone)]
pub struct CustomTable {
    table: BoundaryTable,
    s: ExtensionFn,
    t: ExtensionFn,
    c: ExtensionFn,
}

impl CustomTable {
    pub fn new(table: BoundaryTable) -> Result<Self> {
        let (s, t, c) = extend_table(&table)?;
        Ok(Self { table, s, t, c })
    }

    pub fn boundary_table(&self) -> &BoundaryTable {
        &self.table
    }

    pub fn field(&self, u: Complex64) -> Result<FieldSample> {
        eval_extensions(u, &self.s, &self.t, &self.c)
    }
}

/// Sampling window of a model's conformal coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub re_min: f64,
    pub period: f64,
    /// Height of the sampled strip (the annulus modulus, or a cap for the
    /// cylinder).
    pub im_max: f64,
    pub components: Vec<Component>,
}

/// Any of the supported models, addressed through one sampling coordinate.
#[derive(Debug, Clone)]
pub enum Model {
    /// Half-plane fields sampled through the cylinder coordinate; samples
    /// report u = z = tan(πζ/2) and z-derivatives.
    Uniform,
    UniformCylinder,
    TwoPeriodic(TwoPeriodic),
    Holey(Holey),
    Custom(CustomTable),
}

/// Height of the strip sampled for the uniform cylinder.
pub const CYLINDER_CAP: f64 = 2.0;

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Uniform => "uniform",
            Model::UniformCylinder => "uniform-cylinder",
            Model::TwoPeriodic(_) => "two-periodic",
            Model::Holey(_) => "holey",
            Model::Custom(_) => "custom-table",
        }
    }

    pub fn domain(&self) -> Domain {
        let annulus = |re_min: f64, h: f64| Domain {
            re_min,
            period: 2.0,
            im_max: h,
            components: vec![Component::Outer, Component::Inner],
        };
        match self {
            Model::Uniform | Model::UniformCylinder => Domain {
                re_min: -1.0,
                period: 2.0,
                im_max: CYLINDER_CAP,
                components: vec![Component::Outer],
            },
            Model::TwoPeriodic(m) => annulus(-0.5, m.tau_im()),
            Model::Holey(m) => annulus(0.0, m.params.tau_im),
            Model::Custom(m) => annulus(0.0, m.table.tau_im),
        }
    }

    /// Field at the sampling coordinate u.
    pub fn field(&self, u: Complex64) -> Result<FieldSample> {
        match self {
            Model::Uniform => {
                let arg = PI * u / 2.0;
                if arg.cos().norm() < 1e-12 {
                    return Err(ScenarioError::Domain {
                        u,
                        reason: "too close to the pole of tan at zeta = 1".into(),
                    });
                }
                uniform_field(arg.tan())
            }
            Model::UniformCylinder => uniform_field_cylinder(u),
            Model::TwoPeriodic(m) => m.field(u),
            Model::Holey(m) => m.field(u),
            Model::Custom(m) => m.field(u),
        }
    }

    /// Slope range declared by the model: ([0,1]² square) or (|s|+|t| ≤ 1).
    pub fn slope_in_range(&self, s: f64, t: f64, tol: f64) -> bool {
        match self {
            Model::Uniform | Model::UniformCylinder => {
                s >= -tol && s <= 1.0 + tol && t >= -tol && t <= 1.0 + tol
            }
            _ => s.abs() + t.abs() <= 1.0 + tol,
        }
    }
}

/// Characteristic polynomials of the models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpectralKind {
    /// 1 + z + w − zw on the 1×1 fundamental domain.
    Uniform1x1,
    /// −4 + z + w + 1/z + 1/w on the 2×2 fundamental domain.
    Uniform2x2,
    /// −2(1+b²) + b(z + w + 1/z + 1/w).
    TwoPeriodic { b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPolynomial {
    pub kind: SpectralKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub z: Complex64,
    pub w: Complex64,
}

pub fn characteristic_polynomial(kind: SpectralKind) -> SpectralPolynomial {
    SpectralPolynomial { kind }
}

impl SpectralPolynomial {
    /// Monomials of P at (z, w); P is their sum.
    fn monomials(&self, z: Complex64, w: Complex64) -> Vec<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        match self.kind {
            SpectralKind::Uniform1x1 => vec![one, z, w, -z * w],
            SpectralKind::Uniform2x2 => vec![-4.0 * one, z, w, one / z, one / w],
            SpectralKind::TwoPeriodic { b } => {
                vec![-2.0 * (1.0 + b * b) * one, b * z, b * w, b / z, b / w]
            }
        }
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.monomials(z, w).into_iter().sum()
    }

    /// |P| relative to the size of its monomials.
    pub fn relative_residual(&self, z: Complex64, w: Complex64) -> f64 {
        let m = self.monomials(z, w);
        let scale: f64 = m.iter().map(|x| x.norm()).sum();
        m.into_iter().sum::<Complex64>().norm() / scale.max(1.0)
    }

    /// Vertices of the Newton polygon, counter-clockwise.
    pub fn newton_polygon(&self) -> Vec<(i32, i32)> {
        match self.kind {
            SpectralKind::Uniform1x1 => vec![(0, 0), (1, 0), (1, 1), (0, 1)],
            SpectralKind::Uniform2x2 | SpectralKind::TwoPeriodic { .. } => {
                vec![(1, 0), (0, 1), (-1, 0), (0, -1)]
            }
        }
    }
}

/// Slope (s, t) = (arg w/π, −arg z/π) of a spectral point, after mapping
/// (z, w) to the representative with Im z > 0.
pub fn slope_from_spectral(p: SpectralPoint, poly: &SpectralPolynomial) -> Result<(f64, f64)> {
    let residual = poly.relative_residual(p.z, p.w);
    if !(residual < 1e-10) {
        return Err(ScenarioError::OffCurve {
            z: p.z,
            w: p.w,
            residual,
        });
    }
    if p.z.im.abs() < 1e-14 {
        return Err(ScenarioError::Domain {
            u: p.z,
            reason: "real z is a boundary point of the amoeba".into(),
        });
    }
    let (z, w) = if p.z.im > 0.0 { (p.z, p.w) } else { (p.z.conj(), p.w.conj()) };
    Ok((w.arg() / PI, -z.arg() / PI))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn uniform_table_on_boundary() {
        for &(lo, hi, s, t, cc) in &UNIFORM_TABLE {
            let x = match (lo.is_finite(), hi.is_finite()) {
                (false, _) => hi - 1.0,
                (_, false) => lo + 1.0,
                _ => 0.5 * (lo + hi),
            };
            let f = uniform_field(c(x, 1e-9)).unwrap();
            assert!((f.s - s).abs() < 1e-6 && (f.t - t).abs() < 1e-6 && (f.c - cc).abs() < 1e-6, "{x}: {f:?}");
        }
    }

    #[test]
    fn uniform_center_point() {
        let f = uniform_field(c(0.0, 1.0)).unwrap();
        assert!((f.s - 0.5).abs() < 1e-15 && (f.t - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tau_from_square_lattice_b() {
        let h = tau_im_from_b(2f64.powf(-0.25)).unwrap();
        assert!((h - 1.0).abs() < 1e-12);
    }

    #[test]
    fn holey_points_and_validation() {
        let p = HoleyParams { a: 0.1, kappa: 0.3, tau_im: 0.5, delta: 0.0 };
        let pts = p.inner_points();
        for i in 0..9 {
            assert!((pts[i + 3] - pts[i] - 0.5).abs() < 1e-15);
        }
        assert!(HoleyParams { a: 0.3, ..p }.validate().is_err());
        assert!(HoleyParams { kappa: 1.2, ..p }.validate().is_err());
        assert!(HoleyParams { delta: -0.1, ..p }.validate().is_err());
    }

    #[test]
    fn polynomial_values() {
        let p = characteristic_polynomial(SpectralKind::Uniform1x1);
        assert_eq!(p.eval(c(1.0, 0.0), c(-1.0, 0.0)), c(2.0, 0.0));
        let q = characteristic_polynomial(SpectralKind::Uniform2x2);
        assert_eq!(q.eval(c(1.0, 0.0), c(1.0, 0.0)), c(0.0, 0.0));
    }
}
