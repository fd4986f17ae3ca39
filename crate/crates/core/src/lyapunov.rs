//! Lyapunov energies of the accelerated scheme and its ODE, plus the
//! pairwise curvature diagnostics used to explain non-monotone behaviour.

use crate::error::{Error, Result};
use crate::oracles::{checked_gradient, checked_value, Oracle};
use crate::point::Point;
use crate::scalar::Scalar;

fn optimum<'a, S: Scalar, O: Oracle<S> + ?Sized>(oracle: &'a O) -> Result<(&'a Point<S>, S)> {
    let xstar = oracle
        .minimizer()
        .ok_or(Error::MonitorUnavailable("minimizer x* unknown"))?;
    let fstar = oracle
        .min_value()
        .ok_or(Error::MonitorUnavailable("optimal value F* unknown"))?;
    Ok((xstar, fstar))
}

/// `gap + (mu/2) |z - x*|^2`
pub fn energy_from_parts<S: Scalar>(gap: S, z: &Point<S>, xstar: &Point<S>, mu: S) -> S {
    gap + S::half() * mu * z.dist(xstar).powi(2)
}

/// `E_n = F(x_n) - F* + (mu/2) |z_n - x*|^2`
pub fn discrete_energy<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    x: &Point<S>,
    z: &Point<S>,
    mu: S,
) -> Result<S> {
    let (xstar, fstar) = optimum(oracle)?;
    Ok(energy_from_parts(checked_value(oracle, x)? - fstar, z, xstar, mu))
}

/// Energy written in the `y` iterates only, for `n >= 1`:
/// `F(x_n) - F* + |(y_n - y_{n-1}) / sqrt(s) + sqrt(mu) (y_n - x*) + sqrt(s) grad F(y_{n-1})|^2 / 2`
/// with `x_n = y_{n-1} - s grad F(y_{n-1})`.
///
/// Along the 3-point scheme this coincides with [`discrete_energy`] for every
/// `gamma`, since `z_n - x* ` equals the vector inside the norm divided by `sqrt(mu)`.
pub fn discrete_energy_yform<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    y: &Point<S>,
    y_prev: &Point<S>,
    s: S,
    mu: S,
) -> Result<S> {
    let (xstar, fstar) = optimum(oracle)?;
    let g = checked_gradient(oracle, y_prev)?;
    let x = Point::offset(y_prev, -s, &g);
    let rs = s.sqrt();
    let mut w = Point::lincomb(S::one() / rs, y, -S::one() / rs, y_prev);
    w.axpy(mu.sqrt(), &(y - xstar));
    w.axpy(rs, &g);
    Ok(checked_value(oracle, &x)? - fstar + S::half() * w.norm_sq())
}

/// Coefficients `(upsilon, delta, lambda)` of the continuous energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousCoeffs<S> {
    pub upsilon: S,
    pub delta: S,
    pub lambda: S,
}

impl<S: Scalar> ContinuousCoeffs<S> {
    pub fn new(gamma: S, mu: S, s: S) -> Self {
        let q = (mu * s).sqrt();
        let upsilon = S::one() + S::half() * (S::one() - gamma) * q;
        ContinuousCoeffs {
            upsilon,
            delta: upsilon * (S::one() + S::two() * gamma * q),
            lambda: mu.sqrt() * (S::one() + S::half() * gamma * (gamma - S::one()) * q),
        }
    }
}

/// `delta (F(X) - F*) + |upsilon V + lambda (X - x*) + sqrt(s) grad F(X)|^2 / 2`
pub fn continuous_energy<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    x: &Point<S>,
    v: &Point<S>,
    gamma: S,
    mu: S,
    s: S,
) -> Result<S> {
    let (xstar, fstar) = optimum(oracle)?;
    let c = ContinuousCoeffs::new(gamma, mu, s);
    let g = checked_gradient(oracle, x)?;
    let mut w = v.scaled(c.upsilon);
    w.axpy(c.lambda, &(x - xstar));
    w.axpy(s.sqrt(), &g);
    Ok(c.delta * (checked_value(oracle, x)? - fstar) + S::half() * w.norm_sq())
}

/// `F(y) - F(x) + <grad F(y), x - y>`; nonpositive for convex `F`.
pub fn derivation_difference<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    x: &Point<S>,
    y: &Point<S>,
) -> S {
    oracle.value(y) - oracle.value(x) + oracle.gradient(y).dot(&(x - y))
}

/// Pairs closer than this are rejected by [`curvature_estimate`].
pub const DEGENERATE_PAIR: f64 = 1e-14;

/// Secant curvature `2 (F(x) - F(y) - <grad F(y), x - y>) / |x - y|^2`.
pub fn curvature_estimate<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    x: &Point<S>,
    y: &Point<S>,
) -> Result<S> {
    let d = x - y;
    let n2 = d.norm_sq();
    if !(n2.sqrt() > S::lit(DEGENERATE_PAIR)) {
        return Err(Error::DegeneratePair {
            threshold: DEGENERATE_PAIR,
        });
    }
    let g = checked_gradient(oracle, y)?;
    Ok(S::two() * (checked_value(oracle, x)? - checked_value(oracle, y)? - g.dot(&d)) / n2)
}

/// Successive energy ratio, or `Converged` once the energy is negligible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Contraction<S> {
    Ratio(S),
    Converged,
}

pub const CONVERGED_ENERGY: f64 = 1e-300;

pub fn contraction_ratio<S: Scalar>(e_next: S, e: S) -> Contraction<S> {
    if e.abs() < S::lit(CONVERGED_ENERGY) {
        Contraction::Converged
    } else {
        Contraction::Ratio(e_next / e)
    }
}

/// One energy sample, indexed by iteration or time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord<S> {
    pub n_or_t: S,
    pub energy: S,
    pub gap: S,
    pub contraction_ratio: Option<Contraction<S>>,
}

/// Attaches successive ratios to a sequence of `(index, energy, gap)` samples.
pub fn energy_records<S: Scalar>(samples: &[(S, S, S)]) -> Vec<EnergyRecord<S>> {
    samples
        .iter()
        .enumerate()
        .map(|(i, &(n_or_t, energy, gap))| EnergyRecord {
            n_or_t,
            energy,
            gap,
            contraction_ratio: samples.get(i + 1).map(|next| contraction_ratio(next.1, energy)),
        })
        .collect()
}
