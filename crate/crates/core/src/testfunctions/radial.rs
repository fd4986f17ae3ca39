//! Radial strongly quasar convex functions `h(x) = f(|x|) g(x / |x|)`.
//!
//! `f` is a one-dimensional profile with `f(0) = 0 = min f` and known
//! `(gamma, mu)`; `g >= 1` lives on the unit sphere. The product inherits the
//! profile's constants whatever `g` is, which makes these functions a cheap
//! source of strongly quasar convex objectives with plenty of negative
//! curvature.

use std::fmt;

use crate::error::{param, Result};
use crate::oracles::{fd_gradient, Oracle};
use crate::point::Point;
use crate::scalar::Scalar;
use crate::testfunctions::rng::CoefficientRng;

/// One-dimensional radial profile.
pub trait Profile<S: Scalar>: Send + Sync {
    fn value(&self, t: S) -> S;
    fn d1(&self, t: S) -> S;
    fn d2(&self, t: S) -> S;
    /// `(gamma, mu)` of the profile w.r.t. 0.
    fn quasar(&self) -> (S, S);
}

/// `f(t) = c t^2`, which is `(1, 2c)`-strongly quasar convex.
#[derive(Debug, Clone, Copy)]
pub struct SquareProfile<S> {
    pub scale: S,
}

impl<S: Scalar> Default for SquareProfile<S> {
    fn default() -> Self {
        SquareProfile { scale: S::one() }
    }
}

impl<S: Scalar> Profile<S> for SquareProfile<S> {
    fn value(&self, t: S) -> S {
        self.scale * t * t
    }
    fn d1(&self, t: S) -> S {
        S::two() * self.scale * t
    }
    fn d2(&self, _t: S) -> S {
        S::two() * self.scale
    }
    fn quasar(&self) -> (S, S) {
        (S::one(), S::two() * self.scale)
    }
}

/// A function on the unit sphere, given through an extension to `R^d`.
///
/// Derivatives are those of the extension; the radial construction projects
/// them onto the tangent space.
pub trait SphereFunction<S: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, u: &Point<S>) -> S;

    /// Ambient gradient of the extension. Defaults to central differences.
    fn gradient(&self, u: &Point<S>) -> Point<S> {
        fd_gradient(|p| self.value(p), u, S::lit(1e-6))
    }

    /// Ambient Hessian of the extension applied to `w`.
    fn hvp(&self, _u: &Point<S>, _w: &Point<S>) -> Option<Point<S>> {
        None
    }
}

/// `g == 1`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantSphere {
    pub dim: usize,
}

impl<S: Scalar> SphereFunction<S> for ConstantSphere {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _u: &Point<S>) -> S {
        S::one()
    }
    fn gradient(&self, u: &Point<S>) -> Point<S> {
        Point::zeros(u.dim())
    }
    fn hvp(&self, u: &Point<S>, _w: &Point<S>) -> Option<Point<S>> {
        Some(Point::zeros(u.dim()))
    }
}

/// `g(u) = 1 + sum_i a_i sin(b_i u_i)^2`.
#[derive(Debug, Clone)]
pub struct SineSquareSphere<S> {
    pub a: Vec<S>,
    pub b: Vec<S>,
}

impl<S: Scalar> SphereFunction<S> for SineSquareSphere<S> {
    fn dim(&self) -> usize {
        self.a.len()
    }
    fn value(&self, u: &Point<S>) -> S {
        let sum: S = (0..self.a.len())
            .map(|i| {
                let s = (self.b[i] * u[i]).sin();
                self.a[i] * s * s
            })
            .sum();
        S::one() + sum
    }
    fn gradient(&self, u: &Point<S>) -> Point<S> {
        Point::new(
            (0..self.a.len())
                .map(|i| self.a[i] * self.b[i] * (S::two() * self.b[i] * u[i]).sin())
                .collect(),
        )
    }
    fn hvp(&self, u: &Point<S>, w: &Point<S>) -> Option<Point<S>> {
        Some(Point::new(
            (0..self.a.len())
                .map(|i| {
                    S::two() * self.a[i] * self.b[i] * self.b[i] * (S::two() * self.b[i] * u[i]).cos()
                        * w[i]
                })
                .collect(),
        ))
    }
}

/// `g(u1, u2) = 1 + (1 / 4N) sum_i (a_i sin(b_i u1)^2 + c_i cos(d_i u2)^2)`.
#[derive(Debug, Clone)]
pub struct TrigPairSphere<S> {
    pub a: Vec<S>,
    pub b: Vec<S>,
    pub c: Vec<S>,
    pub d: Vec<S>,
}

impl<S: Scalar> TrigPairSphere<S> {
    fn weight(&self) -> S {
        S::one() / (S::lit(4.0) * S::from_count(self.a.len()))
    }
}

impl<S: Scalar> SphereFunction<S> for TrigPairSphere<S> {
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, u: &Point<S>) -> S {
        let sum: S = (0..self.a.len())
            .map(|i| {
                let s = (self.b[i] * u[0]).sin();
                let c = (self.d[i] * u[1]).cos();
                self.a[i] * s * s + self.c[i] * c * c
            })
            .sum();
        S::one() + self.weight() * sum
    }
    fn gradient(&self, u: &Point<S>) -> Point<S> {
        let two = S::two();
        let (mut g0, mut g1) = (S::zero(), S::zero());
        for i in 0..self.a.len() {
            g0 = g0 + self.a[i] * self.b[i] * (two * self.b[i] * u[0]).sin();
            g1 = g1 - self.c[i] * self.d[i] * (two * self.d[i] * u[1]).sin();
        }
        Point::new(vec![self.weight() * g0, self.weight() * g1])
    }
    fn hvp(&self, u: &Point<S>, w: &Point<S>) -> Option<Point<S>> {
        let two = S::two();
        let (mut h00, mut h11) = (S::zero(), S::zero());
        for i in 0..self.a.len() {
            h00 = h00 + two * self.a[i] * self.b[i] * self.b[i] * (two * self.b[i] * u[0]).cos();
            h11 = h11 - two * self.c[i] * self.d[i] * self.d[i] * (two * self.d[i] * u[1]).cos();
        }
        Some(Point::new(vec![self.weight() * h00 * w[0], self.weight() * h11 * w[1]]))
    }
}

type SphereValueFn<S> = dyn Fn(&Point<S>) -> S + Send + Sync;

/// User-supplied sphere function; derivatives by central differences, so
/// gradients of the resulting radial function are accurate to roughly `1e-6`.
pub struct FnSphere<S: Scalar> {
    dim: usize,
    value: Box<SphereValueFn<S>>,
}

impl<S: Scalar> FnSphere<S> {
    pub fn new(dim: usize, value: impl Fn(&Point<S>) -> S + Send + Sync + 'static) -> Self {
        FnSphere {
            dim,
            value: Box::new(value),
        }
    }
}

impl<S: Scalar> fmt::Debug for FnSphere<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnSphere").field("dim", &self.dim).finish()
    }
}

impl<S: Scalar> SphereFunction<S> for FnSphere<S> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, u: &Point<S>) -> S {
        (self.value)(u)
    }
}

/// `h(x) = f(|x|) g(x / |x|)`, `h(0) = 0`.
pub struct RadialQuasarFunction<S: Scalar, P, G> {
    profile: P,
    sphere: G,
    dim: usize,
    origin: Point<S>,
    /// Smallest sampled value of `g` when it fell below 1 at construction.
    pub sphere_floor_violation: Option<S>,
}

impl<S: Scalar, P, G> fmt::Debug for RadialQuasarFunction<S, P, G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialQuasarFunction")
            .field("dim", &self.dim)
            .field("sphere_floor_violation", &self.sphere_floor_violation)
            .finish()
    }
}

const FLOOR_SAMPLES: usize = 1000;

/// Builds the radial oracle. Samples `g` on the sphere and logs a warning if
/// it dips below 1, in which case the declared constants are not guaranteed.
pub fn build_radial<S, P, G>(profile: P, sphere: G, dim: usize) -> Result<RadialQuasarFunction<S, P, G>>
where
    S: Scalar,
    P: Profile<S>,
    G: SphereFunction<S>,
{
    if dim == 0 {
        return param("dimension must be at least 1");
    }
    if sphere.dim() != dim {
        return param(format!(
            "sphere function has dimension {}, expected {dim}",
            sphere.dim()
        ));
    }
    let mut rng = CoefficientRng::new(0x5eed_f100);
    let floor = (0..FLOOR_SAMPLES)
        .map(|_| sphere.value(&rng.unit_sphere(dim)))
        .fold(S::infinity(), S::min);
    let sphere_floor_violation = if floor < S::one() {
        log::warn!("sphere function drops to {floor} < 1; quasar constants not guaranteed");
        Some(floor)
    } else {
        None
    };
    Ok(RadialQuasarFunction {
        profile,
        sphere,
        dim,
        origin: Point::zeros(dim),
        sphere_floor_violation,
    })
}

impl<S: Scalar, P: Profile<S>, G: SphereFunction<S>> RadialQuasarFunction<S, P, G> {
    pub fn sphere(&self) -> &G {
        &self.sphere
    }

    pub fn profile(&self) -> &P {
        &self.profile
    }

    /// `g` at the direction of `x` (undefined at the origin, where 1 is returned).
    pub fn direction_factor(&self, x: &Point<S>) -> S {
        let r = x.norm();
        if r == S::zero() {
            S::one()
        } else {
            self.sphere.value(&x.scaled(S::one() / r))
        }
    }
}

impl<S: Scalar, P: Profile<S>, G: SphereFunction<S>> Oracle<S> for RadialQuasarFunction<S, P, G> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &Point<S>) -> S {
        let r = x.norm();
        if r == S::zero() {
            return S::zero();
        }
        self.profile.value(r) * self.sphere.value(&x.scaled(S::one() / r))
    }

    fn gradient(&self, x: &Point<S>) -> Point<S> {
        let r = x.norm();
        if r == S::zero() {
            return Point::zeros(self.dim);
        }
        let u = x.scaled(S::one() / r);
        let g = self.sphere.value(&u);
        let gg = self.sphere.gradient(&u);
        // radial part f'(r) g u, tangential part f(r)/r (I - u u^T) grad g
        let tangential = Point::offset(&gg, -u.dot(&gg), &u);
        Point::lincomb(self.profile.d1(r) * g, &u, self.profile.value(r) / r, &tangential)
    }

    fn hvp(&self, x: &Point<S>, v: &Point<S>) -> Option<Point<S>> {
        let r = x.norm();
        if r == S::zero() {
            // second derivative along the ray through v
            let nv = v.norm();
            if nv == S::zero() {
                return Some(Point::zeros(self.dim));
            }
            let g = self.sphere.value(&v.scaled(S::one() / nv));
            return Some(v.scaled(self.profile.d2(S::zero()) * g));
        }
        let u = x.scaled(S::one() / r);
        let g = self.sphere.value(&u);
        let gg = self.sphere.gradient(&u);
        let uv = u.dot(v);
        let du = Point::offset(v, -uv, &u).scaled(S::one() / r);
        let hg = self.sphere.hvp(&u, &du)?;
        let (f0, f1, f2) = (self.profile.value(r), self.profile.d1(r), self.profile.d2(r));
        let ug = u.dot(&gg);
        let dug = du.dot(&gg);
        let pg = Point::offset(&gg, -ug, &u);
        let phg = Point::offset(&hg, -u.dot(&hg), &u);

        let mut out = u.scaled(f2 * uv * g + f1 * dug - f0 / r * dug);
        out.axpy(f1 * g - f0 / r * ug, &du);
        out.axpy((f1 / r - f0 / (r * r)) * uv, &pg);
        out.axpy(f0 / r, &phg);
        Some(out)
    }

    fn minimizer(&self) -> Option<&Point<S>> {
        Some(&self.origin)
    }

    fn min_value(&self) -> Option<S> {
        Some(S::zero())
    }

    fn declared_quasar(&self) -> Option<(S, S)> {
        Some(self.profile.quasar())
    }
}

/// Radial function with `f(t) = t^2` and `g = 1 + sum a_i sin(b_i u_i)^2`,
/// `a_i ~ U[0,1]`, `b_i ~ U[-2.5, 2.5]`; all `a_i` are drawn before the `b_i`.
pub type ExperimentFunction<S> = RadialQuasarFunction<S, SquareProfile<S>, SineSquareSphere<S>>;

pub fn experiment_coefficients(seed: u64, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rng = CoefficientRng::new(seed);
    let a = rng.uniform_vec(dim, 0.0, 1.0);
    let b = rng.uniform_vec(dim, -2.5, 2.5);
    (a, b)
}

pub fn build_experiment_fn<S: Scalar>(seed: u64, dim: usize) -> Result<ExperimentFunction<S>> {
    let (a, b) = experiment_coefficients(seed, dim);
    let sphere = SineSquareSphere {
        a: a.into_iter().map(S::lit).collect(),
        b: b.into_iter().map(S::lit).collect(),
    };
    build_radial(SquareProfile::default(), sphere, dim)
}

/// Number of terms in the two-dimensional showcase function.
pub const FIGURE1_TERMS: usize = 10;

/// Two-dimensional radial function with `f(t) = t^2` and
/// `g = 1 + (1/4N) sum (a_i sin(b_i u1)^2 + c_i cos(d_i u2)^2)`, `N = 10`,
/// `a, c ~ U[0, 20]`, `b, d ~ U[-25, 25]`, drawn in the order a, b, c, d.
pub type Figure1Function<S> = RadialQuasarFunction<S, SquareProfile<S>, TrigPairSphere<S>>;

pub fn build_figure1_fn<S: Scalar>(seed: u64) -> Result<Figure1Function<S>> {
    let mut rng = CoefficientRng::new(seed);
    let n = FIGURE1_TERMS;
    let mut draw = |lo, hi| -> Vec<S> { rng.uniform_vec(n, lo, hi).into_iter().map(S::lit).collect() };
    let a = draw(0.0, 20.0);
    let b = draw(-25.0, 25.0);
    let c = draw(0.0, 20.0);
    let d = draw(-25.0, 25.0);
    build_radial(SquareProfile::default(), TrigPairSphere { a, b, c, d }, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::hvp_or_fd;

    fn fd_check<O: Oracle<f64>>(o: &O, x: &Point<f64>) -> f64 {
        let fd = fd_gradient(|p| o.value(p), x, 1e-6);
        let g = o.gradient(x);
        g.dist(&fd) / (1.0 + g.norm())
    }

    #[test]
    fn constant_sphere_reduces_to_square_norm() {
        let h = build_radial(SquareProfile::<f64>::default(), ConstantSphere { dim: 2 }, 2).unwrap();
        let x = Point::new(vec![3.0, 4.0]);
        assert!((h.value(&x) - 25.0).abs() < 1e-12);
        let g = h.gradient(&x);
        assert!((g[0] - 6.0).abs() < 1e-12 && (g[1] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn origin_is_continuous_extension() {
        let h = build_experiment_fn::<f64>(0, 100).unwrap();
        let z = Point::zeros(100);
        assert_eq!(h.value(&z), 0.0);
        assert_eq!(h.gradient(&z).norm(), 0.0);
    }

    #[test]
    fn experiment_coefficients_are_deterministic() {
        let (a1, b1) = experiment_coefficients(42, 100);
        let (a2, b2) = experiment_coefficients(42, 100);
        assert_eq!(a1, a2);
        assert_eq!(b1, b2);
        assert!(a1.iter().all(|a| (0.0..1.0).contains(a)));
        assert!(b1.iter().all(|b| (-2.5..2.5).contains(b)));
        assert_ne!(experiment_coefficients(43, 100).0, a1);
    }

    #[test]
    fn experiment_gradient_matches_finite_differences() {
        let h = build_experiment_fn::<f64>(0, 100).unwrap();
        let mut rng = CoefficientRng::new(11);
        for _ in 0..100 {
            let x: Point<f64> = rng.in_ball(100, 3.0);
            assert!(fd_check(&h, &x) < 1e-5);
        }
    }

    #[test]
    fn figure1_gradient_matches_finite_differences() {
        let h = build_figure1_fn::<f64>(0).unwrap();
        let mut rng = CoefficientRng::new(12);
        for _ in 0..100 {
            let x: Point<f64> = rng.in_ball(2, 2.0);
            assert!(fd_check(&h, &x) < 1e-5);
        }
        assert_eq!(h.value(&Point::zeros(2)), 0.0);
    }

    #[test]
    fn figure1_sphere_at_least_one() {
        let h = build_figure1_fn::<f64>(5).unwrap();
        assert!(h.sphere_floor_violation.is_none());
        let mut rng = CoefficientRng::new(13);
        for _ in 0..1000 {
            let u: Point<f64> = rng.unit_sphere(2);
            assert!(h.sphere().value(&u) >= 1.0);
        }
    }

    #[test]
    fn user_sphere_below_one_is_flagged() {
        let g = FnSphere::new(2, |u: &Point<f64>| 0.5 + u[0] * u[0]);
        let h = build_radial(SquareProfile::default(), g, 2).unwrap();
        assert!(h.sphere_floor_violation.unwrap() < 1.0);
    }

    #[test]
    fn user_sphere_gradient_falls_back_to_differences() {
        let g = FnSphere::new(2, |u: &Point<f64>| 2.0 + (3.0 * u[0]).sin());
        let h = build_radial(SquareProfile::default(), g, 2).unwrap();
        let x = Point::new(vec![0.4, -1.1]);
        assert!(fd_check(&h, &x) < 1e-5);
        assert!(h.hvp(&x, &x).is_none());
    }

    #[test]
    fn analytic_hvp_matches_dense_fd_hessian() {
        // Oracle: dense Hessian from central differences of the analytic gradient.
        let h = build_experiment_fn::<f64>(0, 100).unwrap();
        let mut rng = CoefficientRng::new(21);
        for _ in 0..3 {
            let x: Point<f64> = rng.in_ball(100, 2.0);
            let v: Point<f64> = rng.normal_point(100);
            let eps = 1e-5;
            let mut hv = Point::zeros(100);
            for j in 0..100 {
                let ej = Point::basis(100, j);
                let col = Point::lincomb(
                    0.5 / eps,
                    &h.gradient(&Point::offset(&x, eps, &ej)),
                    -0.5 / eps,
                    &h.gradient(&Point::offset(&x, -eps, &ej)),
                );
                hv.axpy(v[j], &col);
            }
            let exact = h.hvp(&x, &v).unwrap();
            assert!(exact.dist(&hv) <= 1e-4 * (1.0 + hv.norm()), "{}", exact.dist(&hv));
            let auto = hvp_or_fd(&h, &x, &v, 1e-5).unwrap();
            assert_eq!(auto, exact);
        }
    }

    #[test]
    fn figure1_hvp_matches_gradient_differences() {
        let h = build_figure1_fn::<f64>(3).unwrap();
        let mut rng = CoefficientRng::new(22);
        for _ in 0..50 {
            let x: Point<f64> = rng.in_ball(2, 2.0);
            let v: Point<f64> = rng.unit_sphere(2);
            let eps = 1e-6;
            let fd = Point::lincomb(
                0.5 / eps,
                &h.gradient(&Point::offset(&x, eps, &v)),
                -0.5 / eps,
                &h.gradient(&Point::offset(&x, -eps, &v)),
            );
            let exact = h.hvp(&x, &v).unwrap();
            assert!(exact.dist(&fd) <= 1e-4 * (1.0 + fd.norm()));
        }
    }

    #[test]
    fn ray_restriction_is_scaled_profile() {
        let h = build_experiment_fn::<f64>(1, 10).unwrap();
        let mut rng = CoefficientRng::new(5);
        let u: Point<f64> = rng.unit_sphere(10);
        let c = h.sphere().value(&u);
        for k in 1..20 {
            let t = 0.25 * k as f64;
            let val = h.value(&u.scaled(t));
            assert!((val - c * t * t).abs() <= 1e-12 * (1.0 + val));
        }
    }

    #[test]
    fn quasar_inequality_holds_for_experiment_fn() {
        let h = build_experiment_fn::<f64>(0, 100).unwrap();
        let (gamma, mu) = h.declared_quasar().unwrap();
        assert_eq!((gamma, mu), (1.0, 2.0));
        let mut rng = CoefficientRng::new(9);
        for _ in 0..10_000 {
            let x: Point<f64> = rng.in_ball(100, 4.0);
            let slack = -h.value(&x) + h.gradient(&x).dot(&x) / gamma - 0.5 * mu * x.norm_sq();
            assert!(slack >= -1e-9, "slack {slack}");
        }
    }

    #[test]
    fn works_in_single_precision() {
        let h = build_experiment_fn::<f32>(0, 20).unwrap();
        let x = Point::<f32>::from_f64(&[0.1; 20]);
        assert!(h.value(&x) > 0.0 && h.gradient(&x).is_finite());
    }
}
