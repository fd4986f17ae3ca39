//! Problem interfaces: smooth first-order oracles, proximal operators,
//! composite problems and the composite gradient mapping.

use std::fmt;
use std::sync::Arc;

use crate::error::{param, Error, Result};
use crate::point::Point;
use crate::scalar::Scalar;

/// Black-box access to a differentiable objective `F : R^d -> R`.
///
/// Implementations must be pure: repeated evaluation at the same point
/// returns the same result, and evaluation may happen from several
/// threads at once.
pub trait Oracle<S: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &Point<S>) -> S;

    fn gradient(&self, x: &Point<S>) -> Point<S>;

    /// Exact Hessian-vector product, when the oracle can provide one.
    fn hvp(&self, _x: &Point<S>, _v: &Point<S>) -> Option<Point<S>> {
        None
    }

    /// Known global minimizer.
    fn minimizer(&self) -> Option<&Point<S>> {
        None
    }

    /// Known optimal value `F*`.
    fn min_value(&self) -> Option<S> {
        None
    }

    /// Declared `(gamma, mu)` strong quasar convexity constants w.r.t. the minimizer.
    fn declared_quasar(&self) -> Option<(S, S)> {
        None
    }

    /// Declared smoothness constant `L`.
    fn declared_smoothness(&self) -> Option<S> {
        None
    }

    /// Whether the objective is twice continuously differentiable, except
    /// possibly at the minimizer itself (radial functions have a Hessian jump there).
    fn is_c2(&self) -> bool {
        true
    }
}

macro_rules! forward_oracle {
    ($ty:ty) => {
        impl<S: Scalar, T: Oracle<S> + ?Sized> Oracle<S> for $ty {
            fn dim(&self) -> usize {
                (**self).dim()
            }
            fn value(&self, x: &Point<S>) -> S {
                (**self).value(x)
            }
            fn gradient(&self, x: &Point<S>) -> Point<S> {
                (**self).gradient(x)
            }
            fn hvp(&self, x: &Point<S>, v: &Point<S>) -> Option<Point<S>> {
                (**self).hvp(x, v)
            }
            fn minimizer(&self) -> Option<&Point<S>> {
                (**self).minimizer()
            }
            fn min_value(&self) -> Option<S> {
                (**self).min_value()
            }
            fn declared_quasar(&self) -> Option<(S, S)> {
                (**self).declared_quasar()
            }
            fn declared_smoothness(&self) -> Option<S> {
                (**self).declared_smoothness()
            }
            fn is_c2(&self) -> bool {
                (**self).is_c2()
            }
        }
    };
}

forward_oracle!(&T);
forward_oracle!(Box<T>);
forward_oracle!(Arc<T>);

/// Value with a finiteness check.
pub fn checked_value<S: Scalar, O: Oracle<S> + ?Sized>(oracle: &O, x: &Point<S>) -> Result<S> {
    let v = oracle.value(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::OracleEvaluation {
            point: x.to_f64_vec(),
        })
    }
}

/// Gradient with a finiteness check.
pub fn checked_gradient<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    x: &Point<S>,
) -> Result<Point<S>> {
    let g = oracle.gradient(x);
    if g.is_finite() {
        Ok(g)
    } else {
        Err(Error::OracleEvaluation {
            point: x.to_f64_vec(),
        })
    }
}

/// Gap `F(x) - F*`; requires a known optimal value.
pub fn gap<S: Scalar, O: Oracle<S> + ?Sized>(oracle: &O, x: &Point<S>) -> Result<S> {
    let fstar = oracle
        .min_value()
        .ok_or(Error::MonitorUnavailable("optimal value F* unknown"))?;
    Ok(checked_value(oracle, x)? - fstar)
}

/// Default central-difference step for Hessian-vector products:
/// `1e-5 (1 + |x|) / max(|v|, 1e-12)`.
pub fn default_fd_eps<S: Scalar>(x: &Point<S>, v: &Point<S>) -> S {
    S::lit(1e-5) * (S::one() + x.norm()) / v.norm().max(S::lit(1e-12))
}

/// Hessian-vector product: the oracle's exact product when provided,
/// else `(grad F(x + eps v) - grad F(x - eps v)) / (2 eps)`.
pub fn hvp_or_fd<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    x: &Point<S>,
    v: &Point<S>,
    eps: S,
) -> Result<Point<S>> {
    if let Some(hv) = oracle.hvp(x, v) {
        return if hv.is_finite() {
            Ok(hv)
        } else {
            Err(Error::OracleEvaluation {
                point: x.to_f64_vec(),
            })
        };
    }
    if !(eps > S::zero()) {
        return param("finite-difference step must be positive");
    }
    let gp = checked_gradient(oracle, &Point::offset(x, eps, v))?;
    let gm = checked_gradient(oracle, &Point::offset(x, -eps, v))?;
    Ok(Point::lincomb(S::one() / (S::two() * eps), &gp, -S::one() / (S::two() * eps), &gm))
}

/// [`hvp_or_fd`] with the step from [`default_fd_eps`].
pub fn hvp_auto<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    x: &Point<S>,
    v: &Point<S>,
) -> Result<Point<S>> {
    if v.norm_sq() == S::zero() {
        return Ok(Point::zeros(v.dim()));
    }
    hvp_or_fd(oracle, x, v, default_fd_eps(x, v))
}

/// Central-difference gradient of `f` at `x` with step `h`. Used for verification only.
pub fn fd_gradient<S: Scalar>(f: impl Fn(&Point<S>) -> S, x: &Point<S>, h: S) -> Point<S> {
    let mut g = Point::zeros(x.dim());
    let mut xp = x.clone();
    for i in 0..x.dim() {
        let xi = x[i];
        xp[i] = xi + h;
        let fp = f(&xp);
        xp[i] = xi - h;
        let fm = f(&xp);
        xp[i] = xi;
        g[i] = (fp - fm) / (S::two() * h);
    }
    g
}

type ValueFn<S> = dyn Fn(&Point<S>) -> S + Send + Sync;
type GradFn<S> = dyn Fn(&Point<S>) -> Point<S> + Send + Sync;
type HvpFn<S> = dyn Fn(&Point<S>, &Point<S>) -> Point<S> + Send + Sync;

/// Oracle assembled from closures, for user-supplied problems.
pub struct FnOracle<S: Scalar> {
    dim: usize,
    value: Box<ValueFn<S>>,
    gradient: Box<GradFn<S>>,
    hvp: Option<Box<HvpFn<S>>>,
    minimizer: Option<Point<S>>,
    min_value: Option<S>,
    quasar: Option<(S, S)>,
    smoothness: Option<S>,
}

impl<S: Scalar> FnOracle<S> {
    pub fn new(
        dim: usize,
        value: impl Fn(&Point<S>) -> S + Send + Sync + 'static,
        gradient: impl Fn(&Point<S>) -> Point<S> + Send + Sync + 'static,
    ) -> Self {
        FnOracle {
            dim,
            value: Box::new(value),
            gradient: Box::new(gradient),
            hvp: None,
            minimizer: None,
            min_value: None,
            quasar: None,
            smoothness: None,
        }
    }

    pub fn with_hvp(
        mut self,
        hvp: impl Fn(&Point<S>, &Point<S>) -> Point<S> + Send + Sync + 'static,
    ) -> Self {
        self.hvp = Some(Box::new(hvp));
        self
    }

    pub fn with_minimizer(mut self, minimizer: Point<S>, min_value: S) -> Self {
        self.minimizer = Some(minimizer);
        self.min_value = Some(min_value);
        self
    }

    pub fn with_quasar(mut self, gamma: S, mu: S) -> Self {
        self.quasar = Some((gamma, mu));
        self
    }

    pub fn with_smoothness(mut self, l: S) -> Self {
        self.smoothness = Some(l);
        self
    }
}

impl<S: Scalar> fmt::Debug for FnOracle<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnOracle")
            .field("dim", &self.dim)
            .field("has_hvp", &self.hvp.is_some())
            .field("minimizer", &self.minimizer)
            .finish()
    }
}

impl<S: Scalar> Oracle<S> for FnOracle<S> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Point<S>) -> S {
        (self.value)(x)
    }
    fn gradient(&self, x: &Point<S>) -> Point<S> {
        (self.gradient)(x)
    }
    fn hvp(&self, x: &Point<S>, v: &Point<S>) -> Option<Point<S>> {
        self.hvp.as_ref().map(|h| h(x, v))
    }
    fn minimizer(&self) -> Option<&Point<S>> {
        self.minimizer.as_ref()
    }
    fn min_value(&self) -> Option<S> {
        self.min_value
    }
    fn declared_quasar(&self) -> Option<(S, S)> {
        self.quasar
    }
    fn declared_smoothness(&self) -> Option<S> {
        self.smoothness
    }
}

/// Strong quasar convexity constants `(gamma, mu)` with respect to a reference point.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasarSpec<S> {
    pub gamma: S,
    pub mu: S,
    pub reference_point: Point<S>,
}

impl<S: Scalar> QuasarSpec<S> {
    pub fn new(gamma: S, mu: S, reference_point: Point<S>) -> Result<Self> {
        if !(gamma > S::zero() && gamma <= S::one()) {
            return param(format!("gamma must lie in (0, 1], got {gamma}"));
        }
        if !(mu > S::zero()) {
            return param(format!("mu must be positive, got {mu}"));
        }
        Ok(QuasarSpec {
            gamma,
            mu,
            reference_point,
        })
    }
}

/// Two-sided curvature bounds `(lower, upper)`: the `(a, L)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSpec<S> {
    pub lower: S,
    pub upper: S,
}

impl<S: Scalar> CurvatureSpec<S> {
    pub fn new(lower: S, upper: S) -> Result<Self> {
        if !(upper > S::zero()) {
            return param("upper curvature L must be positive");
        }
        if !(lower <= upper) {
            return param("lower curvature must not exceed L");
        }
        Ok(CurvatureSpec { lower, upper })
    }

    /// Plain `L`-smoothness is the `(-L, L)` case.
    pub fn smooth(l: S) -> Result<Self> {
        Self::new(-l, l)
    }
}

/// Proximal operator of a convex, real-valued function `g`.
pub trait Prox<S: Scalar>: Send + Sync {
    /// `argmin_u g(u) + |v - u|^2 / (2 s)`
    fn prox(&self, v: &Point<S>, s: S) -> Point<S>;

    fn value(&self, x: &Point<S>) -> S;

    /// True only for `g == 0`, where the prox is the identity.
    fn is_zero(&self) -> bool {
        false
    }
}

/// `g == 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroProx;

impl<S: Scalar> Prox<S> for ZeroProx {
    fn prox(&self, v: &Point<S>, _s: S) -> Point<S> {
        v.clone()
    }
    fn value(&self, _x: &Point<S>) -> S {
        S::zero()
    }
    fn is_zero(&self) -> bool {
        true
    }
}

/// `g(x) = lambda * |x|_1`, whose prox is soft-thresholding.
#[derive(Debug, Clone, Copy)]
pub struct L1Prox<S> {
    pub lambda: S,
}

impl<S: Scalar> L1Prox<S> {
    pub fn new(lambda: S) -> Result<Self> {
        if !(lambda >= S::zero()) {
            return param("l1 weight must be nonnegative");
        }
        Ok(L1Prox { lambda })
    }
}

/// `sign(v) * max(|v| - t, 0)`
#[inline]
pub fn soft_threshold<S: Scalar>(v: S, t: S) -> S {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        S::zero()
    }
}

impl<S: Scalar> Prox<S> for L1Prox<S> {
    fn prox(&self, v: &Point<S>, s: S) -> Point<S> {
        let t = self.lambda * s;
        Point::new(v.iter().map(|&c| soft_threshold(c, t)).collect())
    }
    fn value(&self, x: &Point<S>) -> S {
        self.lambda * x.iter().map(|c| c.abs()).sum::<S>()
    }
}

/// `F = f + g` with `f` smooth and `g` convex with a computable prox.
///
/// Only finite, real-valued `g` are supported.
#[derive(Clone)]
pub struct CompositeProblem<S: Scalar> {
    smooth: Arc<dyn Oracle<S>>,
    prox: Arc<dyn Prox<S>>,
    minimizer: Option<Point<S>>,
    min_value: Option<S>,
}

impl<S: Scalar> fmt::Debug for CompositeProblem<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompositeProblem")
            .field("dim", &self.smooth.dim())
            .field("smooth_only", &self.prox.is_zero())
            .field("minimizer", &self.minimizer)
            .field("min_value", &self.min_value)
            .finish()
    }
}

impl<S: Scalar> CompositeProblem<S> {
    pub fn new(smooth: Arc<dyn Oracle<S>>, prox: Arc<dyn Prox<S>>) -> Self {
        CompositeProblem {
            smooth,
            prox,
            minimizer: None,
            min_value: None,
        }
    }

    /// Wraps a smooth oracle with `g == 0`, inheriting its minimizer metadata.
    pub fn smooth_only(oracle: Arc<dyn Oracle<S>>) -> Self {
        let minimizer = oracle.minimizer().cloned();
        let min_value = oracle.min_value();
        CompositeProblem {
            smooth: oracle,
            prox: Arc::new(ZeroProx),
            minimizer,
            min_value,
        }
    }

    pub fn with_minimizer(mut self, minimizer: Point<S>, min_value: S) -> Self {
        self.minimizer = Some(minimizer);
        self.min_value = Some(min_value);
        self
    }

    pub fn dim(&self) -> usize {
        self.smooth.dim()
    }

    pub fn smooth(&self) -> &dyn Oracle<S> {
        &*self.smooth
    }

    pub fn smooth_arc(&self) -> Arc<dyn Oracle<S>> {
        Arc::clone(&self.smooth)
    }

    pub fn prox_part(&self) -> &dyn Prox<S> {
        &*self.prox
    }

    pub fn is_smooth(&self) -> bool {
        self.prox.is_zero()
    }

    pub fn minimizer(&self) -> Option<&Point<S>> {
        self.minimizer.as_ref()
    }

    pub fn min_value(&self) -> Option<S> {
        self.min_value
    }

    /// `F(x) = f(x) + g(x)`
    pub fn value(&self, x: &Point<S>) -> S {
        self.smooth.value(x) + self.prox.value(x)
    }

    pub fn checked_value(&self, x: &Point<S>) -> Result<S> {
        let v = self.value(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::OracleEvaluation {
                point: x.to_f64_vec(),
            })
        }
    }

    pub fn gap(&self, x: &Point<S>) -> Result<S> {
        let fstar = self
            .min_value
            .ok_or(Error::MonitorUnavailable("optimal value F* unknown"))?;
        Ok(self.checked_value(x)? - fstar)
    }

    /// Proximal gradient step `T_s(y) = prox_{s g}(y - s grad f(y))` together with
    /// the composite gradient map `(y - T_s(y)) / s`.
    ///
    /// With `g == 0` the map is returned as `grad f(y)` itself, so the step is
    /// arithmetically identical to a plain gradient step.
    pub fn prox_gradient_step(&self, y: &Point<S>, s: S) -> Result<(Point<S>, Point<S>)> {
        if !(s > S::zero()) {
            return param(format!("step size must be positive, got {s}"));
        }
        let grad = checked_gradient(&*self.smooth, y)?;
        let forward = Point::offset(y, -s, &grad);
        if self.prox.is_zero() {
            return Ok((forward, grad));
        }
        let t = self.prox.prox(&forward, s);
        let map = Point::lincomb(S::one() / s, y, -S::one() / s, &t);
        Ok((t, map))
    }
}

/// Composite gradient mapping `(1/s) (y - prox_{s g}(y - s grad f(y)))`.
pub fn composite_gradient_map<S: Scalar>(
    problem: &CompositeProblem<S>,
    y: &Point<S>,
    s: S,
) -> Result<Point<S>> {
    problem.prox_gradient_step(y, s).map(|(_, g)| g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_sq(dim: usize) -> FnOracle<f64> {
        FnOracle::new(dim, |x: &Point<f64>| 0.5 * x.norm_sq(), |x: &Point<f64>| x.clone())
            .with_minimizer(Point::zeros(dim), 0.0)
    }

    fn scaled_1d(l: f64) -> FnOracle<f64> {
        FnOracle::new(
            1,
            move |x: &Point<f64>| 0.5 * l * x[0] * x[0],
            move |x: &Point<f64>| Point::new(vec![l * x[0]]),
        )
    }

    #[test]
    fn hvp_fd_identity_hessian() {
        let o = half_sq(2);
        let x = Point::new(vec![0.7, -1.3]);
        let v = Point::new(vec![1.0, 0.0]);
        let hv = hvp_auto(&o, &x, &v).unwrap();
        assert!((hv[0] - 1.0).abs() < 1e-9 && hv[1].abs() < 1e-9);
    }

    #[test]
    fn hvp_fd_constant_hessian_1d() {
        let o = scaled_1d(4.0);
        let hv = hvp_or_fd(&o, &Point::new(vec![0.3]), &Point::new(vec![1.0]), 1e-5).unwrap();
        assert!((hv[0] - 4.0).abs() < 1e-6);
    }

    #[test]
    fn hvp_prefers_exact_product() {
        let o = half_sq(1).with_hvp(|_, v| v.scaled(7.0));
        let hv = hvp_or_fd(&o, &Point::new(vec![0.0]), &Point::new(vec![1.0]), 1.0).unwrap();
        assert_eq!(hv[0], 7.0);
    }

    #[test]
    fn hvp_non_finite_gradient_is_an_error() {
        let o = FnOracle::new(1, |_: &Point<f64>| 0.0, |_: &Point<f64>| Point::new(vec![f64::NAN]));
        let err = hvp_auto(&o, &Point::new(vec![1.5]), &Point::new(vec![1.0])).unwrap_err();
        assert!(matches!(err, Error::OracleEvaluation { .. }));
    }

    #[test]
    fn default_eps_scales_with_point_and_direction() {
        let x = Point::new(vec![3.0, 4.0]);
        let v = Point::new(vec![0.0, 2.0]);
        assert!((default_fd_eps::<f64>(&x, &v) - 3e-5).abs() < 1e-18);
    }

    #[test]
    fn grad_map_with_zero_prox_is_gradient() {
        let p = CompositeProblem::smooth_only(Arc::new(half_sq(3)));
        let y = Point::new(vec![0.1, 0.2, -0.3]);
        let g = composite_gradient_map(&p, &y, 0.37).unwrap();
        assert_eq!(g, y);
    }

    #[test]
    fn grad_map_pure_l1_is_soft_threshold() {
        let zero = FnOracle::new(1, |_: &Point<f64>| 0.0, |_: &Point<f64>| Point::zeros(1));
        let p = CompositeProblem::new(Arc::new(zero), Arc::new(L1Prox::new(1.0).unwrap()));
        let g = composite_gradient_map(&p, &Point::new(vec![2.0]), 1.0).unwrap();
        assert_eq!(g[0], 1.0);
    }

    /// Prox oracle: brute-force grid minimization of g(u) + (v-u)^2 / (2 s).
    fn grid_prox(g: impl Fn(f64) -> f64, v: f64, s: f64) -> f64 {
        let n = 400_001;
        let (lo, hi) = (v - 5.0, v + 5.0);
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .map(|u| (u, g(u) + (v - u) * (v - u) / (2.0 * s)))
            .fold((0.0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b })
            .0
    }

    #[test]
    fn grad_map_half_square_plus_abs() {
        // f = x^2/2, g = |x|, s = 0.5, y = 2: forward point 1, prox 0.5, map 3.
        let zero_prox_point = 2.0 - 0.5 * 2.0;
        let oracle_prox = grid_prox(|u| u.abs(), zero_prox_point, 0.5);
        let expected = (2.0 - oracle_prox) / 0.5;
        assert!((expected - 3.0).abs() < 1e-4);
        let p = CompositeProblem::new(Arc::new(half_sq(1)), Arc::new(L1Prox::new(1.0).unwrap()));
        let g = composite_gradient_map(&p, &Point::new(vec![2.0]), 0.5).unwrap();
        assert!((g[0] - expected).abs() < 1e-4);
        assert_eq!(g[0], 3.0);
    }

    #[test]
    fn l1_prox_matches_grid_minimization() {
        let prox = L1Prox::new(0.7).unwrap();
        for &(v, s) in &[(2.0, 0.5), (-0.2, 1.0), (0.9, 2.0), (-3.1, 0.3)] {
            let exact = prox.prox(&Point::new(vec![v]), s)[0];
            let grid = grid_prox(|u| 0.7 * u.abs(), v, s);
            assert!((exact - grid).abs() < 5e-5, "v={v} s={s}: {exact} vs {grid}");
        }
    }

    #[test]
    fn grad_map_rejects_nonpositive_step() {
        let p = CompositeProblem::smooth_only(Arc::new(half_sq(1)));
        assert!(matches!(
            composite_gradient_map(&p, &Point::new(vec![1.0]), 0.0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn spec_constructors_validate() {
        assert!(QuasarSpec::new(0.0, 1.0, Point::<f64>::zeros(1)).is_err());
        assert!(QuasarSpec::new(1.5, 1.0, Point::<f64>::zeros(1)).is_err());
        assert!(QuasarSpec::new(1.0, -1.0, Point::<f64>::zeros(1)).is_err());
        assert!(QuasarSpec::new(1.0, 1.0, Point::<f64>::zeros(1)).is_ok());
        assert!(CurvatureSpec::new(2.0, 1.0).is_err());
        assert_eq!(CurvatureSpec::smooth(3.0).unwrap().lower, -3.0);
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn l1_prox_is_nonexpansive(
            u in proptest::collection::vec(-10.0f64..10.0, 4),
            v in proptest::collection::vec(-10.0f64..10.0, 4),
            s in 0.01f64..5.0,
            lambda in 0.0f64..3.0,
        ) {
            let prox = L1Prox::new(lambda).unwrap();
            let (u, v) = (Point::new(u), Point::new(v));
            let d = prox.prox(&u, s).dist(&prox.prox(&v, s));
            prop_assert!(d <= u.dist(&v) + 1e-12);
        }
    }
}
