//! Tangent-plane method for dimer-model limit shapes.
//!
//! The crate evaluates Weierstrass elliptic functions ([`elliptic`]), builds
//! harmonic extensions of piecewise-constant boundary data on the upper
//! half-plane, the cylinder and the annulus ([`harmonic`]), provides the
//! uniform, two-periodic and holey Aztec diamond fields ([`scenarios`]),
//! solves the tangent-plane equation s_u·x + t_u·y + c_u = 0 to trace arctic
//! curves and reconstruct heights ([`tangent`]), calibrates the holey
//! parameters ([`calibrate`]) and serializes everything ([`io`]).

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibrate;
pub mod elliptic;
pub mod harmonic;
pub mod io;
pub mod roots;
pub mod scenarios;
pub mod selftest;
pub mod tangent;

pub use elliptic::{Lattice, SeriesConfig};
pub use harmonic::{BoundarySegment, BoundaryTable, Component, ExtensionFn};
pub use scenarios::{FieldSample, HoleyParams, Model};
pub use tangent::{ArcticCurve, CurveSample, HeightMesh};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
