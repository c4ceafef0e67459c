//! Crate-wide error type.
//!
//! Variants split into two families: configuration problems (bad dimensions,
//! invalid parameters, malformed input) and runtime violations (a flow left
//! the hyperboloid chart, a sampler found an empty pinched set, a monitored
//! invariant failed). The CLI maps the former to exit code 3 and the latter
//! to exit code 2.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A point stopped being timelike; signals a too-large time step.
    #[error("left hyperboloid chart: {0}")]
    LeftHyperboloidChart(String),

    /// `|H| = 0`: the special normal frame is undefined.
    #[error("mean-curvature-degenerate tensor: |H| = {0:.3e}")]
    MeanCurvatureDegenerate(f64),

    /// `|H|^2 + n^2 c <= 0`: the pinching functions are not defined here.
    #[error("outside mean-curvature regime: {0}")]
    OutsideMeanCurvatureRegime(String),

    #[error("not in pinched regime: {0}")]
    NotInPinchedRegime(String),

    #[error("sampler error: {0}")]
    Sampler(String),

    #[error("remeshing error: {0}")]
    Remeshing(String),

    #[error("construction error: {0}")]
    Construction(String),

    /// A monitored invariant failed during a run that asserts it.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code contract: 3 for configuration errors, 2 for violated
    /// invariants and runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DimensionMismatch(_)
            | Error::Config(_)
            | Error::Domain(_)
            | Error::Precondition(_)
            | Error::Construction(_) => 3,
            _ => 2,
        }
    }
}
