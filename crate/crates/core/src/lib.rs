//! Accelerated first-order methods for strongly quasar convex functions.
//!
//! The numerical core is generic over the scalar type (`f32` or `f64`); the
//! `*64` aliases below fix it to double precision, which is what the
//! benchmarks use.

pub mod error;
pub mod geometry;
pub mod lyapunov;
pub mod odeflow;
pub mod optimizers;
pub mod oracles;
pub mod point;
pub mod scalar;
pub mod testfunctions;

pub use error::{Error, Result};
pub use oracles::{
    composite_gradient_map, hvp_auto, hvp_or_fd, CompositeProblem, CurvatureSpec, FnOracle, L1Prox,
    Oracle, Prox, QuasarSpec, ZeroProx,
};
pub use optimizers::{
    make_nag_params, run, BacktrackState, Method, NagParams, NagState, RunConfig, RunStatus,
    StepRule, TrajectoryRecord, TrajectoryRow,
};
pub use point::Point;
pub use scalar::Scalar;

pub type Point64 = Point<f64>;
pub type Point32 = Point<f32>;
pub type CompositeProblem64 = CompositeProblem<f64>;
pub type FnOracle64 = FnOracle<f64>;
pub type TrajectoryRecord64 = TrajectoryRecord<f64>;
pub type RunConfig64 = RunConfig<f64>;
