//! Dense real vectors.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point (or direction) in `R^d`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Point<S>(Vec<S>);

impl<S: Scalar> Point<S> {
    pub fn new(coords: Vec<S>) -> Self {
        Point(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![S::zero(); dim])
    }

    pub fn from_f64(coords: &[f64]) -> Self {
        Point(coords.iter().map(|&c| S::lit(c)).collect())
    }

    /// Unit vector along axis `i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut p = Self::zeros(dim);
        p.0[i] = S::one();
        p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[S] {
        &self.0
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<S> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, S> {
        self.0.iter()
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.as_f64()).collect()
    }

    pub fn dot(&self, other: &Self) -> S {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(&a, &b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> S {
        self.dot(self)
    }

    pub fn norm(&self) -> S {
        self.norm_sq().sqrt()
    }

    pub fn dist(&self, other: &Self) -> S {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<S>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: S, other: &Self) {
        debug_assert_eq!(self.dim(), other.dim());
        for (s, &o) in self.0.iter_mut().zip(&other.0) {
            *s = *s + a * o;
        }
    }

    pub fn scale_mut(&mut self, a: S) {
        for c in &mut self.0 {
            *c = *c * a;
        }
    }

    pub fn scaled(&self, a: S) -> Self {
        Point(self.0.iter().map(|&c| c * a).collect())
    }

    /// `a * x + b * y`
    pub fn lincomb(a: S, x: &Self, b: S, y: &Self) -> Self {
        debug_assert_eq!(x.dim(), y.dim());
        Point(x.0.iter().zip(&y.0).map(|(&xi, &yi)| a * xi + b * yi).collect())
    }

    /// `x + a * d`
    pub fn offset(x: &Self, a: S, d: &Self) -> Self {
        let mut out = x.clone();
        out.axpy(a, d);
        out
    }

    pub fn max_abs(&self) -> S {
        self.0.iter().fold(S::zero(), |m, c| m.max(c.abs()))
    }

    pub(crate) fn ensure_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                got: self.dim(),
            })
        }
    }
}

impl<S> From<Vec<S>> for Point<S> {
    fn from(v: Vec<S>) -> Self {
        Point(v)
    }
}

impl<S> Index<usize> for Point<S> {
    type Output = S;
    fn index(&self, i: usize) -> &S {
        &self.0[i]
    }
}

impl<S> IndexMut<usize> for Point<S> {
    fn index_mut(&mut self, i: usize) -> &mut S {
        &mut self.0[i]
    }
}

impl<S: Scalar> Add for &Point<S> {
    type Output = Point<S>;
    fn add(self, rhs: &Point<S>) -> Point<S> {
        Point(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a + b).collect())
    }
}

impl<S: Scalar> Sub for &Point<S> {
    type Output = Point<S>;
    fn sub(self, rhs: &Point<S>) -> Point<S> {
        Point(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a - b).collect())
    }
}

impl<S: Scalar> Mul<S> for &Point<S> {
    type Output = Point<S>;
    fn mul(self, rhs: S) -> Point<S> {
        self.scaled(rhs)
    }
}

impl<S: Scalar> Neg for &Point<S> {
    type Output = Point<S>;
    fn neg(self) -> Point<S> {
        Point(self.0.iter().map(|&a| -a).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_algebra() {
        let x = Point::<f64>::new(vec![3.0, 4.0]);
        let y = Point::<f64>::new(vec![1.0, -1.0]);
        assert_eq!(x.norm(), 5.0);
        assert_eq!(x.dot(&y), -1.0);
        assert_eq!((&x - &y).as_slice(), &[2.0, 5.0]);
        assert_eq!(Point::lincomb(2.0, &x, 1.0, &y).as_slice(), &[7.0, 7.0]);
        let mut z = x.clone();
        z.axpy(-1.0, &x);
        assert_eq!(z.norm(), 0.0);
        assert_eq!(x.dist(&y), 29.0f64.sqrt());
    }

    #[test]
    fn works_in_single_precision() {
        let x = Point::<f32>::from_f64(&[0.5, 0.5]);
        assert!((x.norm_sq() - 0.5).abs() < 1e-7);
    }
}
