//! Function ids understood by every subcommand.
//!
//! | id                 | problem                                           | default dim |
//! |--------------------|---------------------------------------------------|-------------|
//! | `quadratic`        | random quadratic, spectrum in `[cond, 1]`          | 50          |
//! | `experiment`       | radial `|x|^2 g(x/|x|)`, declared `(1, 2)`          | 100         |
//! | `figure1`          | 2-D radial surface with 10 trigonometric terms     | 2 (fixed)   |
//! | `lasso`            | `|Ax - b|^2 / 2 + lambda |x|_1`, `A^T A` in `[cond, 1]` | 50      |
//! | `pathological-sqc` | 1-D function with `f'' = -1` near 0, declared `(1/(1+cond), cond)` | 1 |
//! | `pathological-qg`  | 1-D function with critical points accumulating at 0 | 1          |
//!
//! `experiment100` is accepted as an alias of `experiment`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use quasar_core::testfunctions::{
    build_experiment_fn, build_figure1_fn, CoefficientRng, LeastSquares, PathologicalOneD,
    PathologicalOracle, Quadratic,
};
use quasar_core::{CompositeProblem64, L1Prox, Oracle, Point64};

use crate::config::Settings;
use crate::error::{usage, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionId {
    Quadratic,
    Experiment,
    Figure1,
    Lasso,
    PathologicalSqc,
    PathologicalQg,
}

impl FunctionId {
    pub const ALL: [FunctionId; 6] = [
        FunctionId::Quadratic,
        FunctionId::Experiment,
        FunctionId::Figure1,
        FunctionId::Lasso,
        FunctionId::PathologicalSqc,
        FunctionId::PathologicalQg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FunctionId::Quadratic => "quadratic",
            FunctionId::Experiment => "experiment",
            FunctionId::Figure1 => "figure1",
            FunctionId::Lasso => "lasso",
            FunctionId::PathologicalSqc => "pathological-sqc",
            FunctionId::PathologicalQg => "pathological-qg",
        }
    }

    fn default_dim(self) -> usize {
        match self {
            FunctionId::Quadratic | FunctionId::Lasso => 50,
            FunctionId::Experiment => 100,
            FunctionId::Figure1 => 2,
            FunctionId::PathologicalSqc | FunctionId::PathologicalQg => 1,
        }
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionId {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "experiment100" {
            return Ok(FunctionId::Experiment);
        }
        FunctionId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                let known: Vec<_> = FunctionId::ALL.iter().map(|f| f.name()).collect();
                format!("unknown function `{s}` (known: {})", known.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    pub id: FunctionId,
    pub seed: u64,
    pub dim: usize,
    /// `mu / L` for quadratics and lasso, `mu` for the sqc construction.
    pub cond: f64,
    /// l1 weight of the lasso problem.
    pub lambda: f64,
}

impl FunctionSpec {
    pub fn new(id: FunctionId, seed: u64) -> Self {
        FunctionSpec {
            id,
            seed,
            dim: id.default_dim(),
            cond: 1e-2,
            lambda: 1e-2,
        }
    }

    pub fn from_settings(s: &Settings) -> Result<Self> {
        let Some(name) = s.get("function") else {
            return usage("missing `function`");
        };
        let id: FunctionId = name.parse().map_err(crate::error::CliError::Usage)?;
        let mut spec = FunctionSpec::new(id, s.parsed_or("seed", 0)?);
        if let Some(d) = s.parsed::<usize>("dim")? {
            spec.dim = d;
        }
        spec.cond = s.parsed_or("cond", spec.cond)?;
        spec.lambda = s.parsed_or("lambda", spec.lambda)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        FunctionSpec { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let fixed = match self.id {
            FunctionId::Figure1 => Some(2),
            FunctionId::PathologicalSqc | FunctionId::PathologicalQg => Some(1),
            _ => None,
        };
        if let Some(d) = fixed {
            if self.dim != d {
                return usage(format!("{} is {d}-dimensional, got dim={}", self.id, self.dim));
            }
        }
        if self.dim == 0 {
            return usage("dim must be at least 1");
        }
        if !(self.cond > 0.0) {
            return usage("cond must be positive");
        }
        if self.id == FunctionId::Quadratic || self.id == FunctionId::Lasso {
            if self.cond > 1.0 {
                return usage("cond = mu/L must not exceed 1");
            }
        }
        if !(self.lambda >= 0.0) {
            return usage("lambda must be nonnegative");
        }
        Ok(())
    }
}

pub struct BuiltFunction {
    pub spec: FunctionSpec,
    pub problem: CompositeProblem64,
    /// Declared `(gamma, mu)` w.r.t. the problem's minimizer.
    pub declared: Option<(f64, f64)>,
    /// Declared smoothness of the smooth part.
    pub smoothness: Option<f64>,
}

impl BuiltFunction {
    pub fn oracle(&self) -> &dyn Oracle<f64> {
        self.problem.smooth()
    }

    /// The smooth oracle for commands that need `F = f` (no prox term).
    pub fn smooth_only(&self, command: &str) -> Result<&dyn Oracle<f64>> {
        if !self.problem.is_smooth() {
            return usage(format!("`{command}` needs a smooth function; {} is composite", self.spec.id));
        }
        Ok(self.oracle())
    }

    /// `x* + x0_norm u`, `u` uniform on the sphere from a stream derived from the seed.
    pub fn start_point(&self, x0_norm: f64) -> Point64 {
        const X0_STREAM: u64 = 0x5eed_0000_0000_0001;
        let mut rng = CoefficientRng::new(self.spec.seed ^ X0_STREAM);
        let dir: Point64 = rng.unit_sphere(self.spec.dim);
        let center = self
            .problem
            .minimizer()
            .cloned()
            .unwrap_or_else(|| Point64::zeros(self.spec.dim));
        Point64::offset(&center, x0_norm, &dir)
    }
}

/// Gradient-map tolerance for the lasso reference solution.
pub const LASSO_REFERENCE_TOL: f64 = 1e-14;

pub fn build(spec: &FunctionSpec) -> Result<BuiltFunction> {
    spec.validate()?;
    let smooth = |o: Arc<dyn Oracle<f64>>| CompositeProblem64::smooth_only(o);
    let built = match spec.id {
        FunctionId::Quadratic => {
            let q = Quadratic::random(spec.dim, spec.cond, 1.0, spec.seed)?;
            let (mu, l) = (q.eig_min(), q.eig_max());
            BuiltFunction {
                spec: spec.clone(),
                problem: smooth(Arc::new(q)),
                declared: Some((1.0, mu)),
                smoothness: Some(l),
            }
        }
        FunctionId::Experiment => BuiltFunction {
            spec: spec.clone(),
            problem: smooth(Arc::new(build_experiment_fn::<f64>(spec.seed, spec.dim)?)),
            declared: Some((1.0, 2.0)),
            smoothness: None,
        },
        FunctionId::Figure1 => {
            let f = build_figure1_fn::<f64>(spec.seed)?;
            let declared = f.declared_quasar();
            BuiltFunction {
                spec: spec.clone(),
                problem: smooth(Arc::new(f)),
                declared,
                smoothness: None,
            }
        }
        FunctionId::Lasso => {
            let ls = LeastSquares::random(2 * spec.dim, spec.dim, spec.cond, 1.0, spec.seed)?;
            let mu = ls.strong_convexity();
            let problem = CompositeProblem64::new(Arc::new(ls), Arc::new(L1Prox::new(spec.lambda)?));
            let xstar = prox_gradient_reference(&problem, 1.0, LASSO_REFERENCE_TOL, 2_000_000)?;
            let fstar = problem.checked_value(&xstar)?;
            BuiltFunction {
                spec: spec.clone(),
                problem: problem.with_minimizer(xstar, fstar),
                declared: Some((1.0, mu)),
                smoothness: Some(1.0),
            }
        }
        FunctionId::PathologicalSqc => {
            let o = PathologicalOracle::new(PathologicalOneD::sqc(1.0)?).with_mu(spec.cond)?;
            let declared = o.declared_quasar();
            BuiltFunction {
                spec: spec.clone(),
                problem: smooth(Arc::new(o)),
                declared,
                smoothness: Some(1.0),
            }
        }
        FunctionId::PathologicalQg => BuiltFunction {
            spec: spec.clone(),
            problem: smooth(Arc::new(PathologicalOracle::new(PathologicalOneD::<f64>::qg()))),
            declared: None,
            smoothness: Some(1.0),
        },
    };
    Ok(built)
}

/// Proximal gradient with step `1/l` from 0 until the gradient map norm
/// drops to `tol`.
pub fn prox_gradient_reference(
    problem: &CompositeProblem64,
    l: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Point64> {
    let mut x = Point64::zeros(problem.dim());
    for _ in 0..max_iter {
        let (next, map) = problem.prox_gradient_step(&x, 1.0 / l)?;
        x = next;
        if map.norm() <= tol {
            return Ok(x);
        }
    }
    Err(quasar_core::Error::Estimation(format!(
        "prox-gradient reference did not reach {tol:e} in {max_iter} iterations"
    ))
    .into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in FunctionId::ALL {
            assert_eq!(id.name().parse::<FunctionId>().unwrap(), id);
        }
        assert_eq!("experiment100".parse::<FunctionId>().unwrap(), FunctionId::Experiment);
        assert!("rosenbrock".parse::<FunctionId>().is_err());
    }

    #[test]
    fn fixed_dimensions_are_enforced() {
        let mut spec = FunctionSpec::new(FunctionId::Figure1, 0);
        spec.dim = 3;
        assert!(build(&spec).is_err());
    }

    #[test]
    fn every_function_builds() {
        for id in FunctionId::ALL {
            let mut spec = FunctionSpec::new(id, 4);
            if id == FunctionId::Lasso {
                spec.dim = 8;
                spec.cond = 0.1;
            }
            let f = build(&spec).unwrap();
            assert_eq!(f.problem.dim(), spec.dim);
            let x0 = f.start_point(1.0);
            assert!(f.problem.gap(&x0).unwrap() > 0.0, "{id}");
        }
    }

    #[test]
    fn start_point_is_at_requested_distance() {
        let f = build(&FunctionSpec::new(FunctionId::Quadratic, 1)).unwrap();
        let x0 = f.start_point(2.5);
        let d = x0.dist(f.problem.minimizer().unwrap());
        assert!((d - 2.5).abs() < 1e-12);
    }

    #[test]
    fn lasso_reference_is_stationary() {
        let mut spec = FunctionSpec::new(FunctionId::Lasso, 2);
        spec.dim = 6;
        spec.cond = 0.2;
        let f = build(&spec).unwrap();
        let xs = f.problem.minimizer().unwrap();
        let (_, map) = f.problem.prox_gradient_step(xs, 1.0).unwrap();
        assert!(map.norm() <= 1e-13);
    }
}
