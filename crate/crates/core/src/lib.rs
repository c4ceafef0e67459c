//! Numerical laboratory for mean curvature flow of submanifolds of
//! hyperbolic space.
//!
//! The crate has three layers:
//!
//! * pointwise algebra — Lorentzian linear algebra on the hyperboloid model
//!   ([`minkowski`]), the second-fundamental-form scalars and inequality
//!   suites ([`curvature`]), and the scalar pinching functions with their
//!   certification sweeps ([`pinching`], [`certify`]);
//! * flow engines — exact ODE reduction for geodesic spheres and tubes, and
//!   a 1-D finite-difference scheme for rotationally symmetric hypersurfaces
//!   ([`flow`]), both instrumented with the same monitor row format;
//! * reporting — CSV traces, JSON certification reports and run manifests
//!   with deterministic, round-trip-exact number formatting ([`report`]).
//!
//! Everything is `f64`, pure, and deterministic per seed.

// Negated float comparisons below are deliberate: `!(x > 0.0)` rejects NaN
// where `x <= 0.0` would accept it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod curvature;
pub mod error;
pub mod flow;
mod linalg;
pub mod minkowski;
pub mod pinching;
pub mod quadrature;
pub mod report;
pub mod rng;

pub use curvature::{PinchReport, SecondFundamentalForm, SpecialFrameDecomposition};
pub use error::{Error, Result};
pub use flow::{FlowTrace, MonitorConfig, TerminalStatus, TraceRow};
pub use minkowski::{HyperboloidPoint, LorentzVector};
pub use pinching::{PinchingProfile, SigmaConfig};
pub use report::RunManifest;

/// Version string stamped into manifests and reports.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
