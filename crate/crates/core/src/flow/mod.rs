//! Flow engines and their shared monitor-row format.
//!
//! Both engines emit the same [`TraceRow`] schema so downstream tooling can
//! treat a run uniformly: the exact ODE reduction for geodesic spheres and
//! tubes lives in [`equivariant`], the 1-D finite-difference scheme for
//! rotationally symmetric hypersurfaces in [`axisym`].

pub mod axisym;
pub mod equivariant;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalStatus {
    RoundPoint,
    CollapseToGeodesic,
    StepLimit,
}

impl TerminalStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TerminalStatus::RoundPoint => "round_point",
            TerminalStatus::CollapseToGeodesic => "collapse_to_geodesic",
            TerminalStatus::StepLimit => "step_limit",
        }
    }
}

/// One monitor sample. Field order matches the CSV column contract.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub h_sq_max: f64,
    pub ho_sq_max: f64,
    pub pinch_margin_min: f64,
    pub f_sigma_max: f64,
    pub thm41_ratio_max: f64,
    pub grad_ratio_max: f64,
    pub diam: f64,
    pub x0_max: f64,
    pub x0_bound: f64,
}

/// Mandatory CSV header, exact order.
pub const TRACE_HEADER: &str = "t,H_min,H_max,h_sq_max,ho_sq_max,pinch_margin_min,f_sigma_max,thm41_ratio_max,grad_ratio_max,diam,x0_max,x0_bound";

impl TraceRow {
    pub fn csv_line(&self) -> String {
        let f = crate::report::fmt_f64;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            f(self.t),
            f(self.h_min),
            f(self.h_max),
            f(self.h_sq_max),
            f(self.ho_sq_max),
            f(self.pinch_margin_min),
            f(self.f_sigma_max),
            f(self.thm41_ratio_max),
            f(self.grad_ratio_max),
            f(self.diam),
            f(self.x0_max),
            f(self.x0_bound),
        )
    }
}

/// Aggregate statistics of a finished run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceSummary {
    pub steps: u64,
    pub final_time: f64,
    /// Smallest pinch margin over all recorded rows.
    pub min_pinch_margin: f64,
    /// Largest relative residual of `|h|^2 - alpha` (tube boundary identity).
    pub max_boundary_residual: f64,
    /// Smallest `|H|^2 + n^2 c` seen (the mean-curvature excess monitor).
    pub min_mean_excess: f64,
    /// `|h-ring|^2 / |H|^2` at the terminal row.
    pub final_ho_ratio: f64,
    /// Largest `x0_max - x0_bound` over recorded rows.
    pub max_x0_excess: f64,
}

/// A geometry snapshot's monitor time series plus terminal data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowTrace {
    pub rows: Vec<TraceRow>,
    pub status: TerminalStatus,
    /// Extinction time estimate (terminal time plus the asymptotic
    /// remaining-time of the collapsing family), when the run collapsed.
    pub extinction_time: Option<f64>,
    pub summary: TraceSummary,
}

impl FlowTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 + self.rows.len() * 256);
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv_line());
            out.push('\n');
        }
        out
    }
}

/// Thresholds for round-point detection and the gradient/pinching monitors.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MonitorConfig {
    pub sigma: f64,
    pub eta: f64,
    /// Round point declared when `diam < diam_tol * diam(0)` and both
    /// ratio thresholds below hold.
    pub diam_tol: f64,
    /// `|H|_min / |H|_max` must exceed this.
    pub ratio_tol: f64,
    /// `max |h-ring|^2 / |H|^2` must fall below this.
    pub ho_ratio_tol: f64,
    /// Stop once `|H|_max` exceeds this.
    pub h_max_stop: f64,
}

impl MonitorConfig {
    pub fn default_for(n: u32, c: f64) -> Self {
        Self {
            sigma: 0.1,
            eta: (0.5 / n as f64).min(0.1),
            diam_tol: 0.01,
            ratio_tol: 0.95,
            ho_ratio_tol: 1e-3,
            h_max_stop: 1e3 * (-c).sqrt(),
        }
    }

    pub fn validate(&self, n: u32) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Error::Config(format!("sigma must lie in (0,1), got {}", self.sigma)));
        }
        if !(self.eta > 0.0 && self.eta < 1.0 / n as f64) {
            return Err(Error::Config(format!(
                "eta must lie in (0, 1/{n}), got {}",
                self.eta
            )));
        }
        for (name, v) in [
            ("diam_tol", self.diam_tol),
            ("ratio_tol", self.ratio_tol),
            ("ho_ratio_tol", self.ho_ratio_tol),
            ("h_max_stop", self.h_max_stop),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}
