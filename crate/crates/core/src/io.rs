//! Run configuration and output files: curve and mesh CSV, JSON sidecars,
//! SVG plots rendered from CSV rows, OBJ surfaces. Every file is written to
//! a temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibrate::{self, CalibrateError, CalibrateOptions};
use crate::harmonic::{BoundaryTable, Component, HarmonicError};
use crate::scenarios::{Holey, HoleyParams, Model, ScenarioError, TwoPeriodic};
use crate::tangent::{ArcticCurve, HeightMesh};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("bad CSV row {row}: {reason}")]
    Row { row: usize, reason: String },
    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Table(#[from] HarmonicError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Calibrate(#[from] CalibrateError),
}

pub type Result<T> = std::result::Result<T, IoError>;

/// 17 significant digits; parses back to the same f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let err = |source| IoError::File {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.flush().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// One line of a curve CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub component: Component,
    pub u: Complex64,
    pub x: f64,
    pub y: f64,
    pub det: f64,
}

pub const CURVE_HEADER: [&str; 6] = ["component", "re_u", "im_u", "x", "y", "det"];
pub const MESH_HEADER: [&str; 9] = ["j", "k", "re_u", "im_u", "x", "y", "h", "s", "t"];

pub fn curve_rows(curve: &ArcticCurve) -> Vec<CurveRow> {
    curve
        .all_samples()
        .map(|s| CurveRow {
            component: s.component,
            u: s.u,
            x: s.x,
            y: s.y,
            det: s.det,
        })
        .collect()
}

pub fn curve_csv(rows: &[CurveRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CURVE_HEADER)?;
    for r in rows {
        w.write_record([
            r.component.to_string(),
            fmt_f64(r.u.re),
            fmt_f64(r.u.im),
            fmt_f64(r.x),
            fmt_f64(r.y),
            fmt_f64(r.det),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?).expect("CSV output is ASCII"))
}

fn parse_field(rec: &csv::StringRecord, i: usize, row: usize) -> Result<f64> {
    let s = rec.get(i).ok_or(IoError::Row {
        row,
        reason: format!("missing column {i}"),
    })?;
    s.trim().parse().map_err(|_| IoError::Row {
        row,
        reason: format!("'{s}' is not a number"),
    })
}

pub fn read_curve_csv<R: Read>(reader: R) -> Result<Vec<CurveRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CURVE_HEADER {
        return Err(IoError::Row {
            row: 0,
            reason: format!("expected header {CURVE_HEADER:?}, got {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let component = rec[0].parse().map_err(|e: HarmonicError| IoError::Row {
            row,
            reason: e.to_string(),
        })?;
        rows.push(CurveRow {
            component,
            u: Complex64::new(parse_field(&rec, 1, row)?, parse_field(&rec, 2, row)?),
            x: parse_field(&rec, 3, row)?,
            y: parse_field(&rec, 4, row)?,
            det: parse_field(&rec, 5, row)?,
        });
    }
    Ok(rows)
}

/// Valid mesh points with their grid indices.
pub fn mesh_csv(mesh: &HeightMesh) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(MESH_HEADER)?;
    for k in 0..mesh.ny {
        for j in 0..mesh.nx {
            if let Some(p) = mesh.get(j, k) {
                let mut rec = vec![j.to_string(), k.to_string()];
                rec.extend([p.u.re, p.u.im, p.x, p.y, p.h, p.s, p.t].map(fmt_f64));
                w.write_record(&rec)?;
            }
        }
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?).expect("CSV output is ASCII"))
}

/// Triangulated surface (x, y, h) over the conformal grid, wrapping
/// around in j when `periodic`. Cells with a missing corner are skipped.
pub fn mesh_obj(mesh: &HeightMesh, periodic: bool) -> String {
    let mut out = String::from("# arctic height surface: vertices (x, y, h)\n");
    let mut index = vec![0usize; mesh.points.len()];
    let mut next = 1;
    for (i, p) in mesh.points.iter().enumerate() {
        if let Some(p) = p {
            let _ = writeln!(out, "v {} {} {}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.h));
            index[i] = next;
            next += 1;
        }
    }
    let cols = if periodic { mesh.nx } else { mesh.nx.saturating_sub(1) };
    let id = |j: usize, k: usize| index[k * mesh.nx + j % mesh.nx];
    for k in 0..mesh.ny.saturating_sub(1) {
        for j in 0..cols {
            let quad = [id(j, k), id(j + 1, k), id(j + 1, k + 1), id(j, k + 1)];
            if quad.iter().all(|&v| v > 0) {
                let _ = writeln!(out, "f {} {} {}", quad[0], quad[1], quad[2]);
                let _ = writeln!(out, "f {} {} {}", quad[0], quad[2], quad[3]);
            }
        }
    }
    out
}

/// Boundary of the diamond in the (x, y) plane, when the model has one.
pub fn domain_frame(model: &Model) -> Option<Vec<(f64, f64)>> {
    match model {
        Model::Uniform | Model::UniformCylinder => Some(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]),
        Model::TwoPeriodic(_) | Model::Holey(_) => Some(vec![(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]),
        Model::Custom(_) => None,
    }
}

const COLORS: [(Component, &str); 2] = [(Component::Outer, "#d4a017"), (Component::Inner, "#1f5fbf")];

/// SVG drawing of curve rows (one polyline per component) and an optional
/// frame polygon. Uses nothing but its inputs.
pub fn render_svg(rows: &[CurveRow], frame: Option<&[(f64, f64)]>) -> String {
    let pts = rows
        .iter()
        .map(|r| (r.x, r.y))
        .chain(frame.unwrap_or(&[]).iter().copied())
        .filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) || !(y1 > y0) {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let size = 600.0;
    let margin = 20.0;
    let scale = (size - 2.0 * margin) / (x1 - x0).max(y1 - y0);
    // SVG y grows downwards.
    let map = |x: f64, y: f64| (margin + (x - x0) * scale, size - margin - (y - y0) * scale);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if let Some(f) = frame {
        let p: Vec<String> = f.iter().map(|&(x, y)| {
            let (a, b) = map(x, y);
            format!("{a:.3},{b:.3}")
        }).collect();
        let _ = writeln!(out, r#"<polygon points="{}" fill="none" stroke="black" stroke-width="1"/>"#, p.join(" "));
    }
    for (comp, color) in COLORS {
        let p: Vec<String> = rows
            .iter()
            .filter(|r| r.component == comp && r.x.is_finite() && r.y.is_finite())
            .map(|r| {
                let (a, b) = map(r.x, r.y);
                format!("{a:.3},{b:.3}")
            })
            .collect();
        if p.is_empty() {
            continue;
        }
        let _ = writeln!(
            out,
            r#"<polygon class="{comp}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            p.join(" ")
        );
    }
    out.push_str("</svg>\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Uniform,
    UniformCylinder,
    TwoPeriodic,
    Holey,
    CustomTable,
}

impl std::str::FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "uniform" => Self::Uniform,
            "uniform-cylinder" => Self::UniformCylinder,
            "two-periodic" => Self::TwoPeriodic,
            "holey" => Self::Holey,
            "custom-table" => Self::CustomTable,
            _ => {
                return Err(format!(
                    "unknown scenario '{s}' (uniform, uniform-cylinder, two-periodic, holey, custom-table)"
                ))
            }
        })
    }
}

/// Model parameters. Two-periodic takes `b` or `tau_im`. Holey takes
/// `a`, `kappa`, `tau_im` and `delta` explicitly; with `a` or `tau_im`
/// missing the parameters are calibrated for `delta` with `kappa` as the
/// target hole size.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    pub b: Option<f64>,
    pub tau_im: Option<f64>,
    pub a: Option<f64>,
    pub kappa: Option<f64>,
    pub delta: Option<f64>,
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sampling {
    pub n: usize,
    pub eps: f64,
    pub grid: (usize, usize),
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            n: 1000,
            eps: 1e-6,
            grid: (128, 64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub dir: PathBuf,
}

impl Default for Output {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

/// Everything a command needs; read from TOML with sections `[scenario]`,
/// `[sampling]`, `[calibrate]`, `[output]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub params: ScenarioParams,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub calibrate: CalibrateOptions,
    #[serde(default)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    /// Bad input, nothing computed.
    Validation,
    /// A computation failed.
    Numerical,
}

impl IoError {
    pub fn severity(&self) -> Severity {
        match self {
            IoError::Scenario(ScenarioError::Params(_))
            | IoError::Table(_)
            | IoError::Toml(_)
            | IoError::Config(_)
            | IoError::Row { .. }
            | IoError::Csv(_)
            | IoError::File { .. } => Severity::Validation,
            _ => Severity::Numerical,
        }
    }
}

impl RunConfig {
    pub fn new(scenario: ScenarioKind) -> Self {
        Self {
            scenario,
            params: ScenarioParams::default(),
            sampling: Sampling::default(),
            calibrate: CalibrateOptions::default(),
            output: Output::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| IoError::File {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Parameter and sampling checks that need no computation.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(IoError::Config(m));
        let s = &self.sampling;
        if s.n < 4 {
            return bad(format!("n must be at least 4, got {}", s.n));
        }
        if !(s.eps > 0.0 && s.eps < 1e-2) {
            return bad(format!("eps must lie in (0, 1e-2), got {}", s.eps));
        }
        if s.grid.0 < 2 || s.grid.1 < 2 {
            return bad(format!("grid must be at least 2x2, got {:?}", s.grid));
        }
        let p = &self.params;
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => bad(format!("{name} must be positive, got {x}")),
            _ => Ok(()),
        };
        positive("tau_im", p.tau_im)?;
        match self.scenario {
            ScenarioKind::TwoPeriodic => {
                if let Some(b) = p.b {
                    if !(b > 0.0 && b < 1.0) {
                        return bad(format!("b must lie in (0, 1), got {b}"));
                    }
                }
            }
            ScenarioKind::Holey => {
                if let Some(d) = p.delta {
                    if !(d >= 0.0) {
                        return bad(format!("delta must be non-negative, got {d}"));
                    }
                }
                if let Some(k) = p.kappa {
                    if !(k > 0.0 && k < 1.0) {
                        return bad(format!("kappa must lie in (0, 1), got {k}"));
                    }
                }
                if let Some(a) = p.a {
                    if !(a > 0.0 && a < 0.25) {
                        return bad(format!("a must lie in (0, 1/4), got {a}"));
                    }
                }
            }
            ScenarioKind::CustomTable if p.table.is_none() => {
                return bad("custom-table needs a table path".into());
            }
            _ => {}
        }
        Ok(())
    }

    /// Holey parameters, calibrating when `a` or `tau_im` is missing.
    pub fn holey_params(&self) -> Result<HoleyParams> {
        let p = &self.params;
        let delta = p.delta.unwrap_or(0.0);
        match (p.a, p.tau_im) {
            (Some(a), Some(tau_im)) => {
                let hp = HoleyParams {
                    a,
                    kappa: p.kappa.unwrap_or(0.15),
                    tau_im,
                    delta,
                };
                hp.validate()?;
                Ok(hp)
            }
            _ => {
                let mut opts = self.calibrate;
                if let Some(k) = p.kappa {
                    opts.kappa_target = k;
                }
                Ok(calibrate::fit_all(delta, &opts)?.params)
            }
        }
    }

    pub fn build_model(&self) -> Result<Model> {
        self.validate()?;
        let p = &self.params;
        Ok(match self.scenario {
            ScenarioKind::Uniform => Model::Uniform,
            ScenarioKind::UniformCylinder => Model::UniformCylinder,
            ScenarioKind::TwoPeriodic => Model::TwoPeriodic(match (p.b, p.tau_im) {
                (Some(b), _) => TwoPeriodic::from_b(b)?,
                (None, Some(h)) => TwoPeriodic::from_tau(h)?,
                (None, None) => TwoPeriodic::from_b(0.5)?,
            }),
            ScenarioKind::Holey => Model::Holey(Holey::new(self.holey_params()?)?),
            ScenarioKind::CustomTable => {
                let path = p.table.as_ref().expect("validated");
                let text = std::fs::read_to_string(path).map_err(|source| IoError::File {
                    path: path.clone(),
                    source,
                })?;
                let table = BoundaryTable::from_text(&text)?;
                Model::Custom(crate::scenarios::CustomTable::new(table)?)
            }
        })
    }
}

/// Parameters actually used by a model, for sidecars.
pub fn model_params(model: &Model) -> serde_json::Value {
    match model {
        Model::Uniform | Model::UniformCylinder => serde_json::json!({}),
        Model::TwoPeriodic(m) => serde_json::json!({
            "tau_im": m.tau_im(),
            "b": m.b().ok(),
        }),
        Model::Holey(m) => serde_json::to_value(m.params()).expect("params serialize"),
        Model::Custom(m) => serde_json::json!({ "table": m.boundary_table().to_text() }),
    }
}

/// Metadata sidecar shared by all commands.
pub fn sidecar(
    command: &str,
    model: &Model,
    config: &RunConfig,
    extra: serde_json::Value,
    partial: Option<&str>,
) -> serde_json::Value {
    let mut v = serde_json::json!({
        "tool": "arctic",
        "version": crate::VERSION,
        "command": command,
        "scenario": model.name(),
        "parameters": model_params(model),
        "config": config,
        "partial": partial.is_some(),
    });
    if let Some(reason) = partial {
        v["error"] = serde_json::Value::String(reason.to_string());
    }
    if let (Some(obj), serde_json::Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    v
}
