//! Seeded coefficient generator for the random function families.
//!
//! The generator is SplitMix64 with its 64-bit state initialised to the seed.
//! A uniform draw on `[lo, hi)` maps the next output `w` to
//! `lo + (hi - lo) * (w >> 11) * 2^-53`, so coefficient vectors can be
//! regenerated bit-for-bit in any language.

use rand::{Rng, RngCore, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::SplitMix64;

use crate::point::Point;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct CoefficientRng {
    inner: SplitMix64,
}

impl CoefficientRng {
    pub fn new(seed: u64) -> Self {
        CoefficientRng {
            inner: SplitMix64::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn uniform_vec(&mut self, n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|_| self.uniform(lo, hi)).collect()
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn normal_point<S: Scalar>(&mut self, dim: usize) -> Point<S> {
        Point::new((0..dim).map(|_| S::lit(self.normal())).collect())
    }

    /// Uniformly distributed unit vector.
    pub fn unit_sphere<S: Scalar>(&mut self, dim: usize) -> Point<S> {
        loop {
            let p: Point<S> = self.normal_point(dim);
            let n = p.norm();
            if n > S::lit(1e-12) {
                return p.scaled(S::one() / n);
            }
        }
    }

    /// Uniformly distributed point of the closed ball of the given radius.
    pub fn in_ball<S: Scalar>(&mut self, dim: usize, radius: S) -> Point<S> {
        let dir: Point<S> = self.unit_sphere(dim);
        let r = radius * S::lit(self.unit().powf(1.0 / dim as f64));
        dir.scaled(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_outputs() {
        // Reference SplitMix64 stream for state 0.
        let mut rng = CoefficientRng::new(0);
        assert_eq!(rng.next_u64(), 0xe220a8397b1dcdaf);
        assert_eq!(rng.next_u64(), 0x6e789e6aa1b965f4);
    }

    #[test]
    fn uniform_stays_in_range() {
        let mut rng = CoefficientRng::new(7);
        for _ in 0..10_000 {
            let u = rng.uniform(-2.5, 2.5);
            assert!((-2.5..2.5).contains(&u));
        }
    }

    #[test]
    fn ball_samples_within_radius() {
        let mut rng = CoefficientRng::new(3);
        for _ in 0..1000 {
            let p: Point<f64> = rng.in_ball(5, 2.0);
            assert!(p.norm() <= 2.0 + 1e-12);
        }
    }
}
