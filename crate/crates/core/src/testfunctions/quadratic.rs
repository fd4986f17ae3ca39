//! Convex quadratics and least-squares objectives with prescribed spectra.

use crate::error::{param, Result};
use crate::oracles::Oracle;
use crate::point::Point;
use crate::scalar::Scalar;
use crate::testfunctions::rng::CoefficientRng;

/// Columns of a random `rows x cols` matrix with orthonormal columns
/// (Gaussian entries, modified Gram-Schmidt). Requires `cols <= rows`.
pub fn random_orthonormal<S: Scalar>(rows: usize, cols: usize, seed: u64) -> Result<Vec<Point<S>>> {
    if cols > rows {
        return param(format!("cannot fit {cols} orthonormal columns in dimension {rows}"));
    }
    let mut rng = CoefficientRng::new(seed);
    let mut out: Vec<Point<S>> = Vec::with_capacity(cols);
    while out.len() < cols {
        let mut v: Point<S> = rng.normal_point(rows);
        // two passes keep the columns orthogonal to working precision
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&v);
                v.axpy(-c, q);
            }
        }
        let n = v.norm();
        if n > S::lit(1e-8) {
            out.push(v.scaled(S::one() / n));
        }
    }
    Ok(out)
}

/// `n` eigenvalues from `mu` to `l` inclusive, log-uniform in between.
pub fn random_spectrum<S: Scalar>(n: usize, mu: S, l: S, seed: u64) -> Result<Vec<S>> {
    if !(mu > S::zero() && l >= mu) {
        return param("spectrum needs 0 < mu <= L");
    }
    if n == 0 {
        return param("dimension must be at least 1");
    }
    if n == 1 {
        return Ok(vec![mu]);
    }
    let mut rng = CoefficientRng::new(seed ^ 0x9e37_79b9_7f4a_7c15);
    let (lo, hi) = (mu.as_f64().ln(), l.as_f64().ln());
    let mut eig = vec![mu, l];
    eig.extend((2..n).map(|_| S::lit(rng.uniform(lo, hi).exp())));
    Ok(eig)
}

/// `F(x) = (x - c)^T A (x - c) / 2` with `A` symmetric positive definite.
#[derive(Debug, Clone)]
pub struct Quadratic<S: Scalar> {
    dim: usize,
    /// Row-major.
    matrix: Vec<S>,
    center: Point<S>,
    eig_min: S,
    eig_max: S,
}

impl<S: Scalar> Quadratic<S> {
    /// `A = sum_i lambda_i q_i q_i^T` for orthonormal `q_i`.
    pub fn from_eigen(eigenvalues: &[S], vectors: &[Point<S>], center: Point<S>) -> Result<Self> {
        let d = center.dim();
        if eigenvalues.len() != d || vectors.len() != d {
            return param("need one eigenvalue and one eigenvector per dimension");
        }
        if eigenvalues.iter().any(|&e| !(e > S::zero())) {
            return param("eigenvalues must be positive");
        }
        let mut matrix = vec![S::zero(); d * d];
        for (lam, q) in eigenvalues.iter().zip(vectors) {
            for i in 0..d {
                for j in 0..d {
                    matrix[i * d + j] = matrix[i * d + j] + *lam * q[i] * q[j];
                }
            }
        }
        let eig_min = eigenvalues.iter().copied().fold(S::infinity(), S::min);
        let eig_max = eigenvalues.iter().copied().fold(S::zero(), S::max);
        Ok(Quadratic {
            dim: d,
            matrix,
            center,
            eig_min,
            eig_max,
        })
    }

    pub fn diagonal(eigenvalues: &[S], center: Point<S>) -> Result<Self> {
        let d = eigenvalues.len();
        let basis: Vec<Point<S>> = (0..d).map(|i| Point::basis(d, i)).collect();
        Self::from_eigen(eigenvalues, &basis, center)
    }

    /// `c |x - center|^2 / 2`
    pub fn isotropic(dim: usize, c: S, center: Point<S>) -> Result<Self> {
        if center.dim() != dim {
            return param("center has the wrong dimension");
        }
        Self::diagonal(&vec![c; dim], center)
    }

    /// Randomly rotated quadratic with spectrum spanning `[mu, l]`, centered at 0.
    pub fn random(dim: usize, mu: S, l: S, seed: u64) -> Result<Self> {
        let eig = random_spectrum(dim, mu, l, seed)?;
        let q = random_orthonormal(dim, dim, seed)?;
        Self::from_eigen(&eig, &q, Point::zeros(dim))
    }

    pub fn matrix(&self) -> &[S] {
        &self.matrix
    }

    pub fn center(&self) -> &Point<S> {
        &self.center
    }

    pub fn eig_min(&self) -> S {
        self.eig_min
    }

    pub fn eig_max(&self) -> S {
        self.eig_max
    }

    pub fn apply(&self, v: &Point<S>) -> Point<S> {
        let d = self.dim;
        Point::new(
            (0..d)
                .map(|i| (0..d).map(|j| self.matrix[i * d + j] * v[j]).sum())
                .collect(),
        )
    }
}

impl<S: Scalar> Oracle<S> for Quadratic<S> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Point<S>) -> S {
        let r = x - &self.center;
        S::half() * r.dot(&self.apply(&r))
    }
    fn gradient(&self, x: &Point<S>) -> Point<S> {
        self.apply(&(x - &self.center))
    }
    fn hvp(&self, _x: &Point<S>, v: &Point<S>) -> Option<Point<S>> {
        Some(self.apply(v))
    }
    fn minimizer(&self) -> Option<&Point<S>> {
        Some(&self.center)
    }
    fn min_value(&self) -> Option<S> {
        Some(S::zero())
    }
    fn declared_quasar(&self) -> Option<(S, S)> {
        Some((S::one(), self.eig_min))
    }
    fn declared_smoothness(&self) -> Option<S> {
        Some(self.eig_max)
    }
}

/// `f(x) = |A x - b|^2 / 2` with `A = U diag(sigma) V^T`.
#[derive(Debug, Clone)]
pub struct LeastSquares<S: Scalar> {
    rows: usize,
    cols: usize,
    /// Row-major `rows x cols`.
    a: Vec<S>,
    b: Point<S>,
    sigma_min: S,
    sigma_max: S,
    solution: Point<S>,
    residual: S,
}

impl<S: Scalar> LeastSquares<S> {
    /// Random instance whose Hessian `A^T A` has eigenvalues spanning `[mu, l]`.
    pub fn random(rows: usize, cols: usize, mu: S, l: S, seed: u64) -> Result<Self> {
        if rows < cols {
            return param("least squares needs rows >= cols");
        }
        let eig = random_spectrum(cols, mu, l, seed)?;
        let u = random_orthonormal::<S>(rows, cols, seed.wrapping_add(1))?;
        let v = random_orthonormal::<S>(cols, cols, seed.wrapping_add(2))?;
        let sigma: Vec<S> = eig.iter().map(|e| e.sqrt()).collect();
        let mut a = vec![S::zero(); rows * cols];
        for k in 0..cols {
            for i in 0..rows {
                for j in 0..cols {
                    a[i * cols + j] = a[i * cols + j] + sigma[k] * u[k][i] * v[k][j];
                }
            }
        }
        let mut rng = CoefficientRng::new(seed.wrapping_add(3));
        let b: Point<S> = rng.normal_point(rows);
        // x_ls = V diag(1/sigma) U^T b
        let mut solution = Point::zeros(cols);
        for k in 0..cols {
            solution.axpy(u[k].dot(&b) / sigma[k], &v[k]);
        }
        let mut out = LeastSquares {
            rows,
            cols,
            a,
            b,
            sigma_min: eig.iter().copied().fold(S::infinity(), S::min),
            sigma_max: eig.iter().copied().fold(S::zero(), S::max),
            solution,
            residual: S::zero(),
        };
        out.residual = out.value(&out.solution.clone());
        Ok(out)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn matrix(&self) -> &[S] {
        &self.a
    }

    pub fn rhs(&self) -> &Point<S> {
        &self.b
    }

    /// Smallest eigenvalue of `A^T A`.
    pub fn strong_convexity(&self) -> S {
        self.sigma_min
    }

    fn residual_vec(&self, x: &Point<S>) -> Point<S> {
        let n = self.cols;
        Point::new(
            (0..self.rows)
                .map(|i| (0..n).map(|j| self.a[i * n + j] * x[j]).sum::<S>() - self.b[i])
                .collect(),
        )
    }

    fn apply_transpose(&self, r: &Point<S>) -> Point<S> {
        let n = self.cols;
        let mut out = Point::zeros(n);
        for i in 0..self.rows {
            for j in 0..n {
                out[j] = out[j] + self.a[i * n + j] * r[i];
            }
        }
        out
    }
}

impl<S: Scalar> Oracle<S> for LeastSquares<S> {
    fn dim(&self) -> usize {
        self.cols
    }
    fn value(&self, x: &Point<S>) -> S {
        S::half() * self.residual_vec(x).norm_sq()
    }
    fn gradient(&self, x: &Point<S>) -> Point<S> {
        self.apply_transpose(&self.residual_vec(x))
    }
    fn hvp(&self, _x: &Point<S>, v: &Point<S>) -> Option<Point<S>> {
        let mut av = self.residual_vec(v);
        av.axpy(S::one(), &self.b);
        Some(self.apply_transpose(&av))
    }
    fn minimizer(&self) -> Option<&Point<S>> {
        Some(&self.solution)
    }
    fn min_value(&self) -> Option<S> {
        Some(self.residual)
    }
    fn declared_quasar(&self) -> Option<(S, S)> {
        Some((S::one(), self.sigma_min))
    }
    fn declared_smoothness(&self) -> Option<S> {
        Some(self.sigma_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::fd_gradient;

    #[test]
    fn orthonormal_columns() {
        let q = random_orthonormal::<f64>(7, 5, 1).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((q[i].dot(&q[j]) - want).abs() < 1e-13);
            }
        }
        assert!(random_orthonormal::<f64>(3, 4, 1).is_err());
    }

    #[test]
    fn spectrum_hits_both_ends() {
        let e = random_spectrum(10, 1e-3, 1.0, 4).unwrap();
        assert!(e.contains(&1e-3) && e.contains(&1.0));
        assert!(e.iter().all(|&x| (1e-3..=1.0).contains(&x)));
    }

    #[test]
    fn random_quadratic_rayleigh_quotients_in_range() {
        let q = Quadratic::<f64>::random(6, 0.01, 1.0, 2).unwrap();
        let mut rng = CoefficientRng::new(8);
        for _ in 0..100 {
            let v: Point<f64> = rng.unit_sphere(6);
            let r = v.dot(&q.apply(&v));
            assert!(r >= 0.01 - 1e-12 && r <= 1.0 + 1e-12);
        }
        // symmetric
        let m = q.matrix();
        for i in 0..6 {
            for j in 0..6 {
                assert!((m[i * 6 + j] - m[j * 6 + i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn quadratic_gradient_matches_differences() {
        let q = Quadratic::<f64>::random(4, 0.5, 3.0, 3).unwrap();
        let x = Point::new(vec![0.3, -0.2, 1.0, 0.7]);
        let fd = fd_gradient(|p| q.value(p), &x, 1e-6);
        assert!(q.gradient(&x).dist(&fd) < 1e-8);
    }

    #[test]
    fn least_squares_solution_is_stationary() {
        let ls = LeastSquares::<f64>::random(30, 20, 1e-3, 1.0, 5).unwrap();
        let g = ls.gradient(ls.minimizer().unwrap());
        assert!(g.norm() < 1e-10, "{}", g.norm());
        let x = Point::zeros(20);
        assert!(ls.value(&x) >= ls.min_value().unwrap());
    }

    #[test]
    fn least_squares_hessian_spectrum() {
        let ls = LeastSquares::<f64>::random(12, 8, 0.1, 2.0, 6).unwrap();
        let mut rng = CoefficientRng::new(1);
        for _ in 0..50 {
            let v: Point<f64> = rng.unit_sphere(8);
            let r = v.dot(&ls.hvp(&v, &v).unwrap());
            assert!(r >= 0.1 - 1e-12 && r <= 2.0 + 1e-12);
        }
    }
}
