//! Function families: radial strongly quasar convex functions, the two
//! random trigonometric instances, quadratics, and the pathological 1-D
//! constructions.

pub mod pathological;
pub mod quadratic;
pub mod radial;
pub mod rng;

pub use pathological::{eval_pathological, PathologicalKind, PathologicalOneD, PathologicalOracle};
pub use quadratic::{random_orthonormal, random_spectrum, LeastSquares, Quadratic};
pub use radial::{
    build_experiment_fn, build_figure1_fn, build_radial, experiment_coefficients, ConstantSphere,
    ExperimentFunction, Figure1Function, FnSphere, Profile, RadialQuasarFunction, SineSquareSphere,
    SphereFunction, SquareProfile, TrigPairSphere,
};
pub use rng::CoefficientRng;
