//! One-dimensional functions with dyadic piecewise-constant second derivative.
//!
//! On each band `[w, 2w)`, `w = 2^-n`, the curvature is `+c` on
//! `[w, (1 + theta) w)` and `-c` on `[(1 + theta) w, 2w)`. Integrating gives
//! `f'(w) = c (2 theta - 1) w` and `f(w) = K c w^2` with
//! `K = (-theta^2 + 4 theta - 3/2) / 3`, so the function satisfies
//! `f(x / 2) = f(x) / 4` and every band can be evaluated in closed form from
//! its left endpoint. Halving is exact in floating point, so evaluation is
//! exact down to the bottom of the normal range.
//!
//! * `SqcNegativeCurvature`: `theta = 3/4`, curvature `L`. Strongly quasar
//!   convex, yet `f'' = -L` in every neighbourhood of the minimizer.
//! * `QgInfiniteCritical`: `theta = 1/2`, curvature 1. `f'` vanishes at every
//!   `2^-n`, so the function has infinitely many critical points
//!   accumulating at the minimizer while keeping quadratic growth.

use crate::error::{param, Error, Result};
use crate::oracles::Oracle;
use crate::point::Point;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathologicalKind {
    SqcNegativeCurvature,
    QgInfiniteCritical,
}

/// Default number of dyadic levels evaluated exactly. Below `2^-depth` the
/// quadratic envelope `K c x^2` is used.
pub const DEFAULT_DEPTH: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathologicalOneD<S> {
    pub kind: PathologicalKind,
    /// Curvature magnitude for the sqc kind; ignored (fixed to 1) for the qg kind.
    pub l: S,
    pub depth: u32,
}

impl<S: Scalar> PathologicalOneD<S> {
    pub fn sqc(l: S) -> Result<Self> {
        if !(l > S::zero()) {
            return param("curvature L must be positive");
        }
        Ok(PathologicalOneD {
            kind: PathologicalKind::SqcNegativeCurvature,
            l,
            depth: DEFAULT_DEPTH,
        })
    }

    pub fn qg() -> Self {
        PathologicalOneD {
            kind: PathologicalKind::QgInfiniteCritical,
            l: S::one(),
            depth: DEFAULT_DEPTH,
        }
    }

    pub fn with_depth(mut self, depth: u32) -> Self {
        self.depth = depth.max(1);
        self
    }

    /// Magnitude of the second derivative.
    pub fn curvature(&self) -> S {
        match self.kind {
            PathologicalKind::SqcNegativeCurvature => self.l,
            PathologicalKind::QgInfiniteCritical => S::one(),
        }
    }

    /// Fraction of each band `[w, 2w)` carrying positive curvature.
    pub fn theta(&self) -> S {
        match self.kind {
            PathologicalKind::SqcNegativeCurvature => S::lit(0.75),
            PathologicalKind::QgInfiniteCritical => S::half(),
        }
    }

    /// `K` with `f(2^-n) = K c 4^-n`.
    pub fn dyadic_value_coeff(&self) -> S {
        let t = self.theta();
        (-t * t + S::lit(4.0) * t - S::lit(1.5)) / S::lit(3.0)
    }

    /// Left endpoints `[2^-n (1 + theta), 2^-(n-1))` of the negative-curvature
    /// intervals, `n = 1..=levels`.
    pub fn negative_intervals(&self, levels: u32) -> Vec<(S, S)> {
        let t = self.theta();
        (1..=levels as i32)
            .map(|n| {
                let w = S::two().powi(-n);
                (w * (S::one() + t), S::two() * w)
            })
            .collect()
    }
}

/// `(f(x), f'(x), f''(x))` for `x` in `[0, 1]`; `f''` is the right limit at breakpoints.
pub fn eval_pathological<S: Scalar>(p: &PathologicalOneD<S>, x: S) -> Result<(S, S, S)> {
    if !(x >= S::zero() && x <= S::one()) {
        return Err(Error::Domain {
            value: x.as_f64(),
            domain: "[0, 1]",
        });
    }
    Ok(eval_nonneg(p, x))
}

fn eval_nonneg<S: Scalar>(p: &PathologicalOneD<S>, x: S) -> (S, S, S) {
    let c = p.curvature();
    let k = p.dyadic_value_coeff();
    if x == S::zero() {
        return (S::zero(), S::zero(), c);
    }
    let floor = S::two().powi(-(p.depth as i32));
    if x < floor || floor == S::zero() {
        return (k * c * x * x, S::two() * k * c * x, S::two() * k * c);
    }
    // largest power of two w <= x
    let mut w = S::two().powi(x.log2().floor().to_i32().unwrap_or(0));
    while w > x {
        w = w * S::half();
    }
    while S::two() * w <= x {
        w = w * S::two();
    }
    let theta = p.theta();
    let d0 = c * (S::two() * theta - S::one()) * w;
    let f0 = k * c * w * w;
    let e = x - w;
    let tw = theta * w;
    if e < tw {
        (f0 + d0 * e + S::half() * c * e * e, d0 + c * e, c)
    } else {
        let f1 = f0 + d0 * tw + S::half() * c * tw * tw;
        let d1 = d0 + c * tw;
        let e = e - tw;
        (f1 + d1 * e - S::half() * c * e * e, d1 - c * e, -c)
    }
}

/// Oracle on all of `R`: even extension of the construction, continued with
/// curvature `+c` beyond `|x| = 1`. Both extensions preserve smoothness and
/// the quasar convexity of the sqc kind.
#[derive(Debug, Clone)]
pub struct PathologicalOracle<S: Scalar> {
    pub function: PathologicalOneD<S>,
    /// `mu` chosen for the declared `(L / (mu + L), mu)` constants (sqc kind).
    pub mu: Option<S>,
    origin: Point<S>,
}

impl<S: Scalar> PathologicalOracle<S> {
    pub fn new(function: PathologicalOneD<S>) -> Self {
        PathologicalOracle {
            function,
            mu: None,
            origin: Point::zeros(1),
        }
    }

    /// Declares `(gamma, mu) = (L / (mu + L), mu)`; only meaningful for the sqc kind.
    pub fn with_mu(mut self, mu: S) -> Result<Self> {
        if !(mu > S::zero()) {
            return param("mu must be positive");
        }
        if self.function.kind != PathologicalKind::SqcNegativeCurvature {
            return param("the quadratic-growth construction is not strongly quasar convex");
        }
        self.mu = Some(mu);
        Ok(self)
    }

    /// `(f, f', f'')` at any real `t`.
    pub fn eval(&self, t: S) -> (S, S, S) {
        let a = t.abs();
        let sign = if t < S::zero() { -S::one() } else { S::one() };
        let (f, d1, d2) = if a <= S::one() {
            eval_nonneg(&self.function, a)
        } else {
            let (f1, g1, _) = eval_nonneg(&self.function, S::one());
            let c = self.function.curvature();
            let e = a - S::one();
            (f1 + g1 * e + S::half() * c * e * e, g1 + c * e, c)
        };
        (f, sign * d1, d2)
    }
}

impl<S: Scalar> Oracle<S> for PathologicalOracle<S> {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, x: &Point<S>) -> S {
        self.eval(x[0]).0
    }
    fn gradient(&self, x: &Point<S>) -> Point<S> {
        Point::new(vec![self.eval(x[0]).1])
    }
    fn hvp(&self, x: &Point<S>, v: &Point<S>) -> Option<Point<S>> {
        Some(v.scaled(self.eval(x[0]).2))
    }
    fn minimizer(&self) -> Option<&Point<S>> {
        Some(&self.origin)
    }
    fn min_value(&self) -> Option<S> {
        Some(S::zero())
    }
    fn declared_quasar(&self) -> Option<(S, S)> {
        let l = self.function.l;
        self.mu.map(|mu| (l / (mu + l), mu))
    }
    fn declared_smoothness(&self) -> Option<S> {
        Some(self.function.curvature())
    }
    fn is_c2(&self) -> bool {
        false
    }
}
