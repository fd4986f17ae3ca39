//! High-resolution ODE of the accelerated scheme and the heavy-ball baseline,
//! integrated with fixed-step RK4.
//!
//! `upsilon X'' + (1 + gamma) sqrt(mu) X' + sqrt(s) H(X) X' + (1 + gamma sqrt(mu s)) grad F(X) = 0`
//! with `upsilon = 1 + (1 - gamma) sqrt(mu s) / 2`.

use crate::error::{param, Error, Result};
use crate::lyapunov::continuous_energy;
use crate::oracles::{checked_gradient, checked_value, hvp_auto, Oracle};
use crate::point::Point;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct OdeState<S> {
    pub x: Point<S>,
    pub v: Point<S>,
    pub t: S,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeParams<S> {
    pub gamma: S,
    pub mu: S,
    pub s: S,
    /// Mass `1 + (1 - gamma) sqrt(mu s) / 2`.
    pub upsilon: S,
}

impl<S: Scalar> OdeParams<S> {
    pub fn new(gamma: S, mu: S, s: S) -> Result<Self> {
        if !(gamma > S::zero() && gamma <= S::one()) {
            return param(format!("gamma must lie in (0, 1], got {gamma}"));
        }
        if !(mu > S::zero()) {
            return param(format!("mu must be positive, got {mu}"));
        }
        if !(s >= S::zero()) {
            return param(format!("s must be nonnegative, got {s}"));
        }
        Ok(OdeParams {
            gamma,
            mu,
            s,
            upsilon: S::one() + S::half() * (S::one() - gamma) * (mu * s).sqrt(),
        })
    }

    /// Damping coefficient `(1 + gamma) sqrt(mu)`.
    pub fn friction(&self) -> S {
        (S::one() + self.gamma) * self.mu.sqrt()
    }

    /// Force coefficient `1 + gamma sqrt(mu s)`.
    pub fn force(&self) -> S {
        S::one() + self.gamma * (self.mu * self.s).sqrt()
    }
}

/// `min(0.01, 0.1 / sqrt(L))`
pub fn default_dt<S: Scalar>(l: S) -> S {
    S::lit(0.01).min(S::lit(0.1) / l.sqrt())
}

/// Horizon at which `exp(-gamma sqrt(mu) T / 2) = 1e-8`, capped at 200.
pub fn default_horizon<S: Scalar>(gamma: S, mu: S) -> S {
    (S::two() * S::lit(1e8).ln() / (gamma * mu.sqrt())).min(S::lit(200.0))
}

fn hessian_term<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    st: &OdeState<S>,
    s: S,
) -> Result<Point<S>> {
    if s == S::zero() {
        return Ok(Point::zeros(st.v.dim()));
    }
    hvp_auto(oracle, &st.x, &st.v)
}

/// `(X', V')` of the accelerated ODE.
pub fn nag_sqc_rhs<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    st: &OdeState<S>,
    p: &OdeParams<S>,
) -> Result<(Point<S>, Point<S>)> {
    let g = checked_gradient(oracle, &st.x)?;
    let hv = hessian_term(oracle, st, p.s)?;
    let mut acc = st.v.scaled(p.friction());
    acc.axpy(p.s.sqrt(), &hv);
    acc.axpy(p.force(), &g);
    acc.scale_mut(-S::one() / p.upsilon);
    Ok((st.v.clone(), acc))
}

/// `(X', V')` of `X'' + 2 sqrt(mu) X' + (1 + sqrt(mu s)) grad F(X) = 0`.
pub fn hb_rhs<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    st: &OdeState<S>,
    mu: S,
    s: S,
) -> Result<(Point<S>, Point<S>)> {
    let g = checked_gradient(oracle, &st.x)?;
    let acc = Point::lincomb(
        -S::two() * mu.sqrt(),
        &st.v,
        -(S::one() + (mu * s).sqrt()),
        &g,
    );
    Ok((st.v.clone(), acc))
}

/// Effective damping `(1 + gamma) sqrt(mu) + sqrt(s) <H V, V> / |V|^2`;
/// negative values mark negative friction.
pub fn detect_negative_friction<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    st: &OdeState<S>,
    p: &OdeParams<S>,
) -> Result<S> {
    let v2 = st.v.norm_sq();
    if v2 == S::zero() {
        return Err(Error::UndefinedDirection);
    }
    let hv = hvp_auto(oracle, &st.x, &st.v)?;
    Ok(p.friction() + p.s.sqrt() * hv.dot(&st.v) / v2)
}

/// `(1 + gamma sqrt(mu s)) (F - F*) + upsilon |V|^2 / 2`, whose time derivative
/// along the accelerated ODE is `-damping * |V|^2`.
pub fn mechanical_energy<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    st: &OdeState<S>,
    p: &OdeParams<S>,
) -> Result<S> {
    let fstar = oracle
        .min_value()
        .ok_or(Error::MonitorUnavailable("optimal value F* unknown"))?;
    Ok(p.force() * (checked_value(oracle, &st.x)? - fstar) + S::half() * p.upsilon * st.v.norm_sq())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeModel {
    NagSqc,
    HeavyBall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialVelocity {
    /// `X'(0) = 0`, the setting of the rate guarantee.
    Zero,
    /// `X'(0) = -2 sqrt(s) grad F(X_0) / (1 + sqrt(mu s))`; no rate guarantee here.
    GradientKick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntegrateOptions {
    pub model: OdeModel,
    pub initial_velocity: InitialVelocity,
    /// Keep every state (memory `O(steps * d)`).
    pub keep_states: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            model: OdeModel::NagSqc,
            initial_velocity: InitialVelocity::Zero,
            keep_states: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSample<S> {
    pub t: S,
    pub gap: Option<S>,
    pub energy: Option<S>,
    /// `None` when the velocity vanishes.
    pub damping: Option<S>,
    pub speed: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeTrajectory<S> {
    pub params: OdeParams<S>,
    pub samples: Vec<OdeSample<S>>,
    pub states: Vec<OdeState<S>>,
    pub final_state: OdeState<S>,
    /// The oracle is not `C^2`, so the rate guarantee does not apply.
    pub outside_hypotheses: bool,
}

fn rhs<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    st: &OdeState<S>,
    p: &OdeParams<S>,
    model: OdeModel,
) -> Result<(Point<S>, Point<S>)> {
    match model {
        OdeModel::NagSqc => nag_sqc_rhs(oracle, st, p),
        OdeModel::HeavyBall => hb_rhs(oracle, st, p.mu, p.s),
    }
}

fn rk4_step<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    st: &OdeState<S>,
    p: &OdeParams<S>,
    model: OdeModel,
    dt: S,
) -> Result<OdeState<S>> {
    let h2 = S::half() * dt;
    let shifted = |k: &(Point<S>, Point<S>), h: S| OdeState {
        x: Point::offset(&st.x, h, &k.0),
        v: Point::offset(&st.v, h, &k.1),
        t: st.t + h,
    };
    let k1 = rhs(oracle, st, p, model)?;
    let k2 = rhs(oracle, &shifted(&k1, h2), p, model)?;
    let k3 = rhs(oracle, &shifted(&k2, h2), p, model)?;
    let k4 = rhs(oracle, &shifted(&k3, dt), p, model)?;
    let w = dt / S::lit(6.0);
    let mut x = st.x.clone();
    let mut v = st.v.clone();
    for (k, c) in [(&k1, w), (&k2, S::two() * w), (&k3, S::two() * w), (&k4, w)] {
        x.axpy(c, &k.0);
        v.axpy(c, &k.1);
    }
    Ok(OdeState { x, v, t: st.t + dt })
}

fn sample<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    st: &OdeState<S>,
    p: &OdeParams<S>,
) -> Result<OdeSample<S>> {
    let gap = match oracle.min_value() {
        Some(fs) => Some(checked_value(oracle, &st.x)? - fs),
        None => None,
    };
    let energy = if oracle.minimizer().is_some() && gap.is_some() {
        Some(continuous_energy(oracle, &st.x, &st.v, p.gamma, p.mu, p.s)?)
    } else {
        None
    };
    let damping = match detect_negative_friction(oracle, st, p) {
        Ok(d) => Some(d),
        Err(Error::UndefinedDirection) => None,
        Err(e) => return Err(e),
    };
    Ok(OdeSample {
        t: st.t,
        gap,
        energy,
        damping,
        speed: st.v.norm(),
    })
}

/// Fixed-step RK4 from `(x0, V0)` over `[0, T]`; the final step is shortened
/// to land on `T`.
pub fn integrate<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    x0: &Point<S>,
    p: &OdeParams<S>,
    horizon: S,
    dt: S,
    opts: IntegrateOptions,
) -> Result<OdeTrajectory<S>> {
    if !(horizon > S::zero()) {
        return param("horizon T must be positive");
    }
    if !(dt > S::zero() && dt <= horizon) {
        return param("step dt must lie in (0, T]");
    }
    x0.ensure_dim(oracle.dim())?;
    let v0 = match opts.initial_velocity {
        InitialVelocity::Zero => Point::zeros(x0.dim()),
        InitialVelocity::GradientKick => {
            let q = (p.mu * p.s).sqrt();
            checked_gradient(oracle, x0)?.scaled(-S::two() * p.s.sqrt() / (S::one() + q))
        }
    };
    let mut st = OdeState {
        x: x0.clone(),
        v: v0,
        t: S::zero(),
    };
    let outside_hypotheses = !oracle.is_c2();
    if outside_hypotheses {
        log::warn!("oracle is not C^2: trajectory lies outside the hypotheses of the rate guarantee");
    }
    let steps = (horizon / dt).ceil().to_usize().unwrap_or(usize::MAX);
    let mut samples = Vec::with_capacity(steps + 1);
    let mut states = Vec::new();
    samples.push(sample(oracle, &st, p)?);
    if opts.keep_states {
        states.push(st.clone());
    }
    for k in 0..steps {
        let h = if k + 1 == steps { horizon - st.t } else { dt };
        let next = rk4_step(oracle, &st, p, opts.model, h);
        let next = match next {
            Ok(n) if n.x.is_finite() && n.v.is_finite() => n,
            _ => {
                return Err(Error::BlowUp {
                    last_finite_time: st.t.as_f64(),
                })
            }
        };
        st = next;
        samples.push(sample(oracle, &st, p).map_err(|_| Error::BlowUp {
            last_finite_time: st.t.as_f64(),
        })?);
        if opts.keep_states {
            states.push(st.clone());
        }
    }
    Ok(OdeTrajectory {
        params: *p,
        samples,
        states,
        final_state: st,
        outside_hypotheses,
    })
}

/// Bound on `K_0` in `F(X(t)) - F* <= K_0 (F(X_0) - F*) exp(-gamma sqrt(mu) t / 2) / gamma`.
pub const RATE_CONSTANT_BOUND: f64 = 7.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCheck<S> {
    pub k_observed: S,
    pub pass: bool,
}

/// `K_observed = max_t gamma gap(t) exp(gamma sqrt(mu) t / 2) / gap0`.
pub fn verify_rate<S: Scalar>(traj: &OdeTrajectory<S>, gamma: S, mu: S, gap0: S) -> Result<RateCheck<S>> {
    if !(gap0 > S::zero()) {
        return param("initial gap must be positive");
    }
    if traj.samples.is_empty() {
        return param("empty trajectory");
    }
    let c = S::half() * gamma * mu.sqrt();
    let mut k = S::zero();
    for smp in &traj.samples {
        let gap = smp
            .gap
            .ok_or(Error::MonitorUnavailable("optimal value F* unknown"))?;
        k = k.max(gamma * gap * (c * smp.t).exp() / gap0);
    }
    Ok(RateCheck {
        k_observed: k,
        pass: k <= S::lit(RATE_CONSTANT_BOUND) + S::lit(1e-9),
    })
}

/// Observed convergence order from final states at steps `dt`, `dt/2`, `dt/4`:
/// `log2(|X_dt - X_dt/2| / |X_dt/2 - X_dt/4|)`.
pub fn estimate_order<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    x0: &Point<S>,
    p: &OdeParams<S>,
    horizon: S,
    dt: S,
    model: OdeModel,
) -> Result<S> {
    let opts = IntegrateOptions {
        model,
        ..Default::default()
    };
    let end = |h: S| -> Result<Point<S>> {
        let tr = integrate(oracle, x0, p, horizon, h, opts)?;
        let mut out = tr.final_state.x.into_vec();
        out.extend(tr.final_state.v.into_vec());
        Ok(Point::new(out))
    };
    let a = end(dt)?;
    let b = end(dt * S::half())?;
    let c = end(dt * S::lit(0.25))?;
    let num = a.dist(&b);
    let den = b.dist(&c);
    if !(den > S::zero()) {
        return Err(Error::Estimation("step-halving differences vanished".into()));
    }
    Ok((num / den).log2())
}
