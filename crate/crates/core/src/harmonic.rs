//! Harmonic extensions of piecewise-constant boundary data.
//!
//! On the upper half-plane the extension of the indicator of (a, b) is
//! (1/π)·arg((z−b)/(z−a)). On the annulus {0 ≤ Im u ≤ Im τ} with horizontal
//! period 2 the analogue is built from Im log σ plus a term linear in Im u
//! that makes the block vanish on the opposite boundary circle.
//!
//! Every [`ExtensionFn`] is a weighted list of such blocks, so its Wirtinger
//! derivative ∂_u = (∂_x − i∂_y)/2 is exact: a sum of ζ differences.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elliptic::{EllipticError, Lattice};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Tolerance on segment endpoints when checking that a component is
/// partitioned.
const PARTITION_TOL: f64 = 1e-12;

/// Largest net linear coefficient still counted as elliptic for s and t.
const ELLIPTIC_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarmonicError {
    #[error("point {u} is outside the domain: {reason}")]
    Domain { u: Complex64, reason: String },
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error("invalid boundary table: {0}")]
    Table(String),
    #[error("the sigma product for {field} is not elliptic: {condition} (off by {value:.3e})")]
    NotElliptic {
        field: &'static str,
        condition: &'static str,
        value: f64,
    },
}

pub type Result<T> = std::result::Result<T, HarmonicError>;

/// Boundary circle of the annulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    /// Im u = 0.
    Outer,
    /// Im u = Im τ.
    Inner,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Outer => write!(f, "outer"),
            Component::Inner => write!(f, "inner"),
        }
    }
}

impl FromStr for Component {
    type Err = HarmonicError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "outer" => Ok(Component::Outer),
            "inner" => Ok(Component::Inner),
            other => Err(HarmonicError::Table(format!("unknown component '{other}'"))),
        }
    }
}

/// An interval of one boundary circle with constant (s, t, c). Stored as
/// (start, len) with 0 < len < 2 so wrap-around is unambiguous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySegment {
    pub component: Component,
    pub start: f64,
    pub len: f64,
    pub s: f64,
    pub t: f64,
    pub c: f64,
    /// Values filled in by a symmetry rule rather than read from a source table.
    #[serde(default)]
    pub inferred: bool,
}

impl BoundarySegment {
    pub fn new(component: Component, start: f64, end: f64, s: f64, t: f64, c: f64) -> Self {
        Self {
            component,
            start,
            len: end - start,
            s,
            t,
            c,
            inferred: false,
        }
    }

    pub fn end(&self) -> f64 {
        self.start + self.len
    }

    pub fn midpoint(&self) -> f64 {
        self.start + 0.5 * self.len
    }
}

/// Boundary data on the annulus of modulus τ = i·tau_im.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTable {
    pub tau_im: f64,
    /// Coefficient of the −δ·Im u term added to c.
    pub delta: f64,
    /// Constant added to c.
    pub constant: f64,
    pub segments: Vec<BoundarySegment>,
}

impl BoundaryTable {
    pub fn lattice(&self) -> Result<Lattice> {
        Ok(Lattice::imaginary(self.tau_im)?)
    }

    pub fn component(&self, comp: Component) -> impl Iterator<Item = &BoundarySegment> {
        self.segments.iter().filter(move |s| s.component == comp)
    }

    /// Checks that each nonempty component is partitioned by its segments.
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_im > 0.0) || !self.tau_im.is_finite() {
            return Err(HarmonicError::Table(format!("tau_im must be positive, got {}", self.tau_im)));
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(HarmonicError::Table(format!("delta must be >= 0, got {}", self.delta)));
        }
        if !self.constant.is_finite() {
            return Err(HarmonicError::Table("constant must be finite".into()));
        }
        for seg in &self.segments {
            if !(seg.len > 0.0 && seg.len < 2.0) {
                return Err(HarmonicError::Table(format!(
                    "segment starting at {} has length {} outside (0, 2)",
                    seg.start, seg.len
                )));
            }
            if ![seg.start, seg.s, seg.t, seg.c].iter().all(|v| v.is_finite()) {
                return Err(HarmonicError::Table(format!(
                    "segment starting at {} has non-finite data",
                    seg.start
                )));
            }
        }
        for comp in [Component::Outer, Component::Inner] {
            let mut segs: Vec<(f64, f64)> = self
                .component(comp)
                .map(|s| (s.start.rem_euclid(2.0), s.len))
                .collect();
            if segs.is_empty() {
                continue;
            }
            segs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let total: f64 = segs.iter().map(|s| s.1).sum();
            if (total - 2.0).abs() > PARTITION_TOL * segs.len() as f64 {
                return Err(HarmonicError::Table(format!(
                    "{comp} segments cover length {total}, expected 2"
                )));
            }
            for w in 0..segs.len() {
                let (s0, l0) = segs[w];
                let next = segs[(w + 1) % segs.len()].0;
                let gap = (s0 + l0 - next).rem_euclid(2.0);
                let gap = gap.min(2.0 - gap);
                if gap > PARTITION_TOL {
                    return Err(HarmonicError::Table(format!(
                        "{comp} segment ending at {} does not meet the next one at {}",
                        s0 + l0,
                        next
                    )));
                }
            }
        }
        Ok(())
    }

    /// Key-value text form: `tau_im`, `delta`, `constant` lines, then one
    /// `segment = component start end s t c [inferred]` line per segment.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("tau_im = {:?}\n", self.tau_im));
        out.push_str(&format!("delta = {:?}\n", self.delta));
        out.push_str(&format!("constant = {:?}\n", self.constant));
        for s in &self.segments {
            out.push_str(&format!(
                "segment = {} {:?} {:?} {:?} {:?} {:?}{}\n",
                s.component,
                s.start,
                s.end(),
                s.s,
                s.t,
                s.c,
                if s.inferred { " inferred" } else { "" }
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tau_im = None;
        let mut delta = 0.0;
        let mut constant = 0.0;
        let mut segments = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| HarmonicError::Table(format!("line {}: {msg}: '{raw}'", lineno + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value"))?;
            let value = value.trim();
            let num = |v: &str| v.parse::<f64>().map_err(|_| err("bad number"));
            match key.trim() {
                "tau_im" => tau_im = Some(num(value)?),
                "delta" => delta = num(value)?,
                "constant" => constant = num(value)?,
                "segment" => {
                    let f: Vec<&str> = value.split_whitespace().collect();
                    if f.len() != 6 && !(f.len() == 7 && f[6] == "inferred") {
                        return Err(err("segment needs: component start end s t c [inferred]"));
                    }
                    let comp: Component = f[0].parse()?;
                    let mut seg = BoundarySegment::new(
                        comp,
                        num(f[1])?,
                        num(f[2])?,
                        num(f[3])?,
                        num(f[4])?,
                        num(f[5])?,
                    );
                    seg.inferred = f.len() == 7;
                    segments.push(seg);
                }
                _ => return Err(err("unknown key")),
            }
        }
        let table = Self {
            tau_im: tau_im.ok_or_else(|| HarmonicError::Table("missing tau_im".into()))?,
            delta,
            constant,
            segments,
        };
        table.validate()?;
        Ok(table)
    }
}

/// Harmonic measure of (a, b) seen from z in the upper half-plane:
/// (1/π)·arg((z−b)/(z−a)), in [0, 1].
pub fn halfplane_block(z: Complex64, a: f64, b: f64) -> Result<f64> {
    if !(z.im > 0.0) {
        return Err(HarmonicError::Domain {
            u: z,
            reason: "the half-plane block needs Im z > 0".into(),
        });
    }
    Ok(((z - b).arg() - (z - a).arg()) / PI)
}

fn check_annulus(u: Complex64, lat: &Lattice) -> Result<()> {
    let h = lat.tau_im();
    let slack = 1e-12 * h;
    if !(u.im >= -slack && u.im <= h + slack) || !u.re.is_finite() {
        return Err(HarmonicError::Domain {
            u,
            reason: format!("annulus points need 0 <= Im u <= {h}"),
        });
    }
    Ok(())
}

/// Shifts u by a multiple of 2 so that Re u − a ∈ [0, 2).
fn window(u: Complex64, a: f64) -> Complex64 {
    let k = ((u.re - a) / 2.0).floor();
    u - 2.0 * k
}

/// Uncorrected lower block: (1/π)·Im[log σ(u−b) − log σ(u−a)].
fn lower_raw(u: Complex64, a: f64, b: f64, lat: &Lattice) -> Result<f64> {
    let w = window(u, a);
    let lb = lat.log_sigma_upper(w - b)?;
    let la = lat.log_sigma_upper(w - a)?;
    Ok((lb - la).im / PI)
}

/// Uncorrected upper block: (1/π)·Im[log σ(u−τ−a) − log σ(u−τ−b)].
fn upper_raw(u: Complex64, a: f64, b: f64, lat: &Lattice) -> Result<f64> {
    let w = window(u, a) - lat.tau();
    let la = lat.log_sigma_lower(w - a)?;
    let lb = lat.log_sigma_lower(w - b)?;
    Ok((la - lb).im / PI)
}

/// Linear and constant correction (coefficient of Im u, constant) making a
/// block vanish on the opposite circle. The raw block is constant there, so
/// one evaluation fixes it.
fn correction(comp: Component, a: f64, b: f64, lat: &Lattice) -> Result<(f64, f64)> {
    let h = lat.tau_im();
    let x0 = b + 0.5 * (2.0 - (b - a));
    match comp {
        Component::Outer => {
            let top = lower_raw(Complex64::new(x0, h), a, b, lat)?;
            Ok((-top / h, 0.0))
        }
        Component::Inner => {
            let bot = upper_raw(Complex64::new(x0, 0.0), a, b, lat)?;
            Ok((bot / h, -bot))
        }
    }
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    let len = b - a;
    if !(len > 0.0 && len < 2.0) {
        return Err(HarmonicError::Table(format!(
            "interval ({a}, {b}) must have length in (0, 2)"
        )));
    }
    Ok(())
}

/// Harmonic function on the annulus, 2-periodic in Re u, equal to 1 on the
/// outer interval (a, b), 0 on the rest of the outer circle and on the whole
/// inner circle.
pub fn annulus_block_lower(u: Complex64, a: f64, b: f64, lat: &Lattice) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    check_interval(a, b)?;
    check_annulus(u, lat)?;
    let (lin, cst) = correction(Component::Outer, a, b, lat)?;
    Ok(lower_raw(u, a, b, lat)? + lin * u.im + cst)
}

/// Harmonic function on the annulus, 2-periodic in Re u, equal to 1 on the
/// inner interval (τ+a, τ+b), 0 elsewhere on both circles.
pub fn annulus_block_upper(u: Complex64, a: f64, b: f64, lat: &Lattice) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    check_interval(a, b)?;
    check_annulus(u, lat)?;
    let (lin, cst) = correction(Component::Inner, a, b, lat)?;
    Ok(upper_raw(u, a, b, lat)? + lin * u.im + cst)
}

fn lower_raw_derivative(u: Complex64, a: f64, b: f64, lat: &Lattice) -> Result<Complex64> {
    Ok((lat.zeta(u - b)? - lat.zeta(u - a)?) / (2.0 * I * PI))
}

fn upper_raw_derivative(u: Complex64, a: f64, b: f64, lat: &Lattice) -> Result<Complex64> {
    let t = lat.tau();
    Ok((lat.zeta(u - t - a)? - lat.zeta(u - t - b)?) / (2.0 * I * PI))
}

/// ∂_u of [`annulus_block_lower`].
pub fn block_derivative_lower(u: Complex64, a: f64, b: f64, lat: &Lattice) -> Result<Complex64> {
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    check_interval(a, b)?;
    check_annulus(u, lat)?;
    let (lin, _) = correction(Component::Outer, a, b, lat)?;
    Ok(lower_raw_derivative(u, a, b, lat)? + lin / (2.0 * I))
}

/// ∂_u of [`annulus_block_upper`]:
/// (1/2iπ)(ζ(u−τ−a) − ζ(u−τ−b)) + (linear coefficient)/(2i).
pub fn block_derivative_upper(u: Complex64, a: f64, b: f64, lat: &Lattice) -> Result<Complex64> {
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    check_interval(a, b)?;
    check_annulus(u, lat)?;
    let (lin, _) = correction(Component::Inner, a, b, lat)?;
    Ok(upper_raw_derivative(u, a, b, lat)? + lin / (2.0 * I))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Block {
    component: Component,
    a: f64,
    b: f64,
    weight: f64,
}

/// Σ weight·block(u) + lin·Im u + constant, with exact derivative.
#[derive(Debug, Clone)]
pub struct ExtensionFn {
    lattice: Arc<Lattice>,
    blocks: Vec<Block>,
    lin: f64,
    constant: f64,
}

impl ExtensionFn {
    pub fn new(lattice: Arc<Lattice>) -> Self {
        Self {
            lattice,
            blocks: Vec::new(),
            lin: 0.0,
            constant: 0.0,
        }
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    /// Adds `weight` times the block of the interval (start, start+len) on
    /// `component`.
    pub fn add_segment(&mut self, component: Component, start: f64, len: f64, weight: f64) -> Result<()> {
        if weight == 0.0 {
            return Ok(());
        }
        let (a, b) = (start, start + len);
        check_interval(a, b)?;
        let (lin, cst) = correction(component, a, b, &self.lattice)?;
        self.lin += weight * lin;
        self.constant += weight * cst;
        self.blocks.push(Block {
            component,
            a,
            b,
            weight,
        });
        Ok(())
    }

    /// Adds coef·Im u.
    pub fn add_linear(&mut self, coef: f64) {
        self.lin += coef;
    }

    pub fn add_constant(&mut self, value: f64) {
        self.constant += value;
    }

    /// Net coefficient of Im u (block corrections included).
    pub fn linear_coefficient(&self) -> f64 {
        self.lin
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn value(&self, u: Complex64) -> Result<f64> {
        check_annulus(u, &self.lattice)?;
        let mut acc = self.lin * u.im + self.constant;
        for bl in &self.blocks {
            let raw = match bl.component {
                Component::Outer => lower_raw(u, bl.a, bl.b, &self.lattice)?,
                Component::Inner => upper_raw(u, bl.a, bl.b, &self.lattice)?,
            };
            acc += bl.weight * raw;
        }
        Ok(acc)
    }

    /// Wirtinger derivative ∂_u.
    pub fn derivative(&self, u: Complex64) -> Result<Complex64> {
        check_annulus(u, &self.lattice)?;
        let mut acc = Complex64::new(0.0, self.lin * -0.5);
        for bl in &self.blocks {
            let d = match bl.component {
                Component::Outer => lower_raw_derivative(u, bl.a, bl.b, &self.lattice)?,
                Component::Inner => upper_raw_derivative(u, bl.a, bl.b, &self.lattice)?,
            };
            acc += bl.weight * d;
        }
        Ok(acc)
    }

    /// Holomorphic G with Im G = π·value (mod 2π when weights are integers):
    /// the log of the σ-product, without window reduction so that exp(G) is
    /// continuous in u.
    pub fn holomorphic(&self, u: Complex64) -> Result<Complex64> {
        check_annulus(u, &self.lattice)?;
        let lat = &self.lattice;
        let mut acc = PI * self.lin * u + I * PI * self.constant;
        for bl in &self.blocks {
            let d = match bl.component {
                Component::Outer => lat.log_sigma_upper(u - bl.b)? - lat.log_sigma_upper(u - bl.a)?,
                Component::Inner => {
                    let w = u - lat.tau();
                    lat.log_sigma_lower(w - bl.a)? - lat.log_sigma_lower(w - bl.b)?
                }
            };
            acc += bl.weight * d;
        }
        Ok(acc)
    }

    /// Net weight of log σ(u − p) at each boundary point p, merged by
    /// position mod 2. Positive weights are zeros of the σ-product, negative
    /// ones poles.
    pub fn boundary_divisor(&self) -> Vec<(Component, f64, f64)> {
        let mut pts: Vec<(Component, f64, f64)> = Vec::new();
        let mut push = |comp: Component, p: f64, w: f64| {
            let p = p.rem_euclid(2.0);
            if let Some(e) = pts.iter_mut().find(|e| {
                let d = (e.1 - p).rem_euclid(2.0);
                e.0 == comp && d.min(2.0 - d) < 1e-12
            }) {
                e.2 += w;
            } else {
                pts.push((comp, p, w));
            }
        };
        for bl in &self.blocks {
            match bl.component {
                Component::Outer => {
                    push(Component::Outer, bl.b, bl.weight);
                    push(Component::Outer, bl.a, -bl.weight);
                }
                Component::Inner => {
                    push(Component::Inner, bl.a, bl.weight);
                    push(Component::Inner, bl.b, -bl.weight);
                }
            }
        }
        pts.retain(|e| e.2.abs() > 1e-12);
        pts.sort_by(|x, y| (x.0 as u8, x.1).partial_cmp(&(y.0 as u8, y.1)).unwrap());
        pts
    }
}

/// Builds the three extensions of a table. c additionally carries the table
/// constant and the −δ·Im u term. s and t must come from elliptic σ-products:
/// equal zero and pole counts, and no residual Im u term.
pub fn extend_table(table: &BoundaryTable) -> Result<(ExtensionFn, ExtensionFn, ExtensionFn)> {
    table.validate()?;
    let lat = Arc::new(table.lattice()?);
    let mut s = ExtensionFn::new(lat.clone());
    let mut t = ExtensionFn::new(lat.clone());
    let mut c = ExtensionFn::new(lat);
    for seg in &table.segments {
        s.add_segment(seg.component, seg.start, seg.len, seg.s)?;
        t.add_segment(seg.component, seg.start, seg.len, seg.t)?;
        c.add_segment(seg.component, seg.start, seg.len, seg.c)?;
    }
    c.add_constant(table.constant);
    c.add_linear(-table.delta);
    for (name, f) in [("s", &s), ("t", &t)] {
        let balance: f64 = f.boundary_divisor().iter().map(|e| e.2).sum();
        if balance.abs() > ELLIPTIC_TOL {
            return Err(HarmonicError::NotElliptic {
                field: name,
                condition: "zero and pole counts differ",
                value: balance,
            });
        }
        if f.linear_coefficient().abs() > ELLIPTIC_TOL {
            return Err(HarmonicError::NotElliptic {
                field: name,
                condition: "sum of zeros differs from sum of poles",
                value: f.linear_coefficient(),
            });
        }
    }
    Ok((s, t, c))
}
