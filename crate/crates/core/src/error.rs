use thiserror::Error;

/// Errors raised by oracles, optimizers and diagnostics.
///
/// Payload coordinates are stored as `f64` regardless of the scalar type
/// the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("oracle returned a non-finite value at {point:?}")]
    OracleEvaluation { point: Vec<f64> },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("iterates diverged at iteration {iteration}: {reason}")]
    Divergence {
        iteration: usize,
        reason: String,
        last_finite: Vec<f64>,
    },

    #[error("monitor unavailable: {0}")]
    MonitorUnavailable(&'static str),

    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("backtracking failed: L exceeded {limit:e} without sufficient decrease")]
    BacktrackingFailure { limit: f64 },

    #[error("degenerate pair: points closer than {threshold:e}")]
    DegeneratePair { threshold: f64 },

    #[error("degenerate segment: point coincides with the reference point")]
    DegenerateSegment,

    #[error("velocity is zero, damping direction undefined")]
    UndefinedDirection,

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("ODE state blew up after t = {last_finite_time}")]
    BlowUp { last_finite_time: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
