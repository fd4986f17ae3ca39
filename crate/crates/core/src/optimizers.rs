//! Gradient descent, the 3-point and 2-point accelerated schemes for strongly
//! quasar convex functions, the proximal variant, and backtracking on `L`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{param, Error, Result};
use crate::lyapunov::{curvature_estimate, derivation_difference, energy_from_parts};
use crate::oracles::{checked_gradient, checked_value, CompositeProblem, Oracle};
use crate::point::Point;
use crate::scalar::Scalar;

/// Coefficients of the accelerated scheme:
/// `alpha = 1 / (1 + sqrt(mu s))`, `beta = 1 - gamma sqrt(mu s)`, `eta = sqrt(s / mu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NagParams<S> {
    pub s: S,
    pub gamma: S,
    pub mu: S,
    pub alpha: S,
    pub beta: S,
    pub eta: S,
}

pub fn make_nag_params<S: Scalar>(gamma: S, mu: S, s: S) -> Result<NagParams<S>> {
    if !(gamma > S::zero() && gamma <= S::one()) {
        return param(format!("gamma must lie in (0, 1], got {gamma}"));
    }
    if !(mu > S::zero()) {
        return param(format!("mu must be positive, got {mu}"));
    }
    if !(s > S::zero()) || !s.is_finite() {
        return param(format!("step size must be positive, got {s}"));
    }
    let q = (mu * s).sqrt();
    if gamma * q > S::one() {
        return param(format!(
            "gamma * sqrt(mu * s) = {} exceeds 1, beta would be negative",
            gamma * q
        ));
    }
    Ok(NagParams {
        s,
        gamma,
        mu,
        alpha: S::one() / (S::one() + q),
        beta: S::one() - gamma * q,
        eta: (s / mu).sqrt(),
    })
}

impl<S: Scalar> NagParams<S> {
    /// `sqrt(mu s)`
    pub fn q(&self) -> S {
        (self.mu * self.s).sqrt()
    }

    /// Per-step contraction factor `1 - gamma sqrt(mu s)`.
    pub fn rate(&self) -> S {
        S::one() - self.gamma * self.q()
    }

    /// Momentum and correction coefficients of the 2-point form:
    /// `((1 - gamma q) / (1 + q), q (gamma - 1) / (1 + q))`.
    pub fn two_point_coeffs(&self) -> (S, S) {
        let q = self.q();
        (
            (S::one() - self.gamma * q) / (S::one() + q),
            q * (self.gamma - S::one()) / (S::one() + q),
        )
    }
}

/// `s = gamma^2 mu / L^2`, the step for which plain `L`-smoothness suffices.
pub fn corollary_stepsize<S: Scalar>(gamma: S, mu: S, l: S) -> S {
    gamma * gamma * mu / (l * l)
}

/// Iterates of the 3-point scheme; `x_prev` and `y_prev` serve the 2-point form.
#[derive(Debug, Clone, PartialEq)]
pub struct NagState<S> {
    pub x: Point<S>,
    pub y: Point<S>,
    pub z: Point<S>,
    pub n: usize,
    pub x_prev: Point<S>,
    pub y_prev: Point<S>,
}

impl<S: Scalar> NagState<S> {
    /// `z_0 = x_0`, and the 2-point history starts at `x_{-1} = y_{-1} = x_0`.
    pub fn new(x0: Point<S>) -> Self {
        NagState {
            y: x0.clone(),
            z: x0.clone(),
            x_prev: x0.clone(),
            y_prev: x0.clone(),
            x: x0,
            n: 0,
        }
    }
}

fn divergence<S: Scalar>(iteration: usize, reason: impl Into<String>, last: &Point<S>) -> Error {
    Error::Divergence {
        iteration,
        reason: reason.into(),
        last_finite: last.to_f64_vec(),
    }
}

fn gradient_or_diverge<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    at: &Point<S>,
    iteration: usize,
    last: &Point<S>,
) -> Result<Point<S>> {
    checked_gradient(oracle, at).map_err(|_| divergence(iteration, "non-finite gradient", last))
}

fn finite_or_diverge<S: Scalar>(p: Point<S>, iteration: usize, last: &Point<S>) -> Result<Point<S>> {
    if p.is_finite() {
        Ok(p)
    } else {
        Err(divergence(iteration, "non-finite iterate", last))
    }
}

/// `x - s grad F(x)`
pub fn gd_step<S: Scalar, O: Oracle<S> + ?Sized>(oracle: &O, x: &Point<S>, s: S) -> Result<Point<S>> {
    if !(s > S::zero()) {
        return param(format!("step size must be positive, got {s}"));
    }
    let g = gradient_or_diverge(oracle, x, 0, x)?;
    finite_or_diverge(Point::offset(x, -s, &g), 0, x)
}

fn extrapolate<S: Scalar>(state: &NagState<S>, alpha: S) -> Point<S> {
    Point::lincomb(alpha, &state.x, S::one() - alpha, &state.z)
}

/// Shared tail of the 3-point and proximal updates: `t` is the new `x`,
/// `map` the (generalized) gradient at `y`.
fn advance<S: Scalar>(
    state: &NagState<S>,
    y: Point<S>,
    t: Point<S>,
    map: &Point<S>,
    p: &NagParams<S>,
) -> Result<NagState<S>> {
    let mut z = Point::lincomb(p.beta, &state.z, S::one() - p.beta, &y);
    z.axpy(-p.eta, map);
    let x = finite_or_diverge(t, state.n, &state.x)?;
    let z = finite_or_diverge(z, state.n, &state.x)?;
    Ok(NagState {
        x_prev: state.x.clone(),
        y_prev: y.clone(),
        x,
        y,
        z,
        n: state.n + 1,
    })
}

/// One step of the 3-point scheme:
/// `y = alpha x + (1 - alpha) z`, `x' = y - s grad F(y)`,
/// `z' = beta z + (1 - beta) y - eta grad F(y)`.
pub fn nag3_step<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    state: &NagState<S>,
    p: &NagParams<S>,
) -> Result<NagState<S>> {
    let y = extrapolate(state, p.alpha);
    let g = gradient_or_diverge(oracle, &y, state.n, &state.x)?;
    let t = Point::offset(&y, -p.s, &g);
    advance(state, y, t, &g, p)
}

/// One step of the 2-point form. Returns `(y_n, x_{n+1})`.
pub fn nag2_step<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    x: &Point<S>,
    x_prev: &Point<S>,
    y_prev: &Point<S>,
    p: &NagParams<S>,
) -> Result<(Point<S>, Point<S>)> {
    let y = two_point_extrapolate(x, x_prev, y_prev, p);
    let g = gradient_or_diverge(oracle, &y, 0, x)?;
    let next = finite_or_diverge(Point::offset(&y, -p.s, &g), 0, x)?;
    Ok((y, next))
}

fn two_point_extrapolate<S: Scalar>(
    x: &Point<S>,
    x_prev: &Point<S>,
    y_prev: &Point<S>,
    p: &NagParams<S>,
) -> Point<S> {
    let (c1, c2) = p.two_point_coeffs();
    let mut y = x.clone();
    y.axpy(c1, &(x - x_prev));
    y.axpy(c2, &(x - y_prev));
    y
}

fn require_unit_gamma<S: Scalar>(gamma: S) -> Result<()> {
    if gamma == S::one() {
        Ok(())
    } else {
        param(format!(
            "the proximal scheme needs gamma = 1 (got {gamma}): with a nonzero g the quasar \
             point need not be a critical point of f, and the inequality with gamma < 1 \
             cannot hold there"
        ))
    }
}

/// One step of the proximal scheme: `x' = T_s(y) = prox_{s g}(y - s grad f(y))`,
/// `z' = beta z + (1 - beta) y - (eta / s)(y - T_s(y))`.
pub fn prox_nag_step<S: Scalar>(
    problem: &CompositeProblem<S>,
    state: &NagState<S>,
    p: &NagParams<S>,
) -> Result<NagState<S>> {
    require_unit_gamma(p.gamma)?;
    let y = extrapolate(state, p.alpha);
    let (t, map) = problem
        .prox_gradient_step(&y, p.s)
        .map_err(|e| match e {
            Error::OracleEvaluation { .. } => divergence(state.n, "non-finite gradient", &state.x),
            other => other,
        })?;
    advance(state, y, t, &map, p)
}

/// Backtracking estimate of the local smoothness constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BacktrackState<S> {
    pub l_current: S,
    pub growth: S,
    /// Optimistic decrease applied once per call; 1 disables it.
    pub shrink: S,
    pub limit: S,
}

impl<S: Scalar> BacktrackState<S> {
    /// Growth 2, shrink 0.9, failure above `1e12`.
    pub fn new(l0: S) -> Result<Self> {
        Self::with_factors(l0, S::two(), S::lit(0.9))
    }

    pub fn with_factors(l0: S, growth: S, shrink: S) -> Result<Self> {
        if !(l0 > S::zero()) {
            return param("initial L must be positive");
        }
        if !(growth > S::one()) {
            return param("growth factor must exceed 1");
        }
        if !(shrink > S::zero() && shrink <= S::one()) {
            return param("shrink factor must lie in (0, 1]");
        }
        Ok(BacktrackState {
            l_current: l0,
            growth,
            shrink,
            limit: S::lit(1e12),
        })
    }
}

/// Smallest `L = shrink * L_current * growth^k` with
/// `F(y - grad F(y) / L) <= F(y) - |grad F(y)|^2 / (2 L)`; stores it in `bt`.
pub fn backtrack_l<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    y: &Point<S>,
    bt: &mut BacktrackState<S>,
) -> Result<S> {
    let fy = checked_value(oracle, y)?;
    let g = checked_gradient(oracle, y)?;
    let g2 = g.norm_sq();
    let mut l = bt.l_current * bt.shrink;
    loop {
        let trial = oracle.value(&Point::offset(y, -S::one() / l, &g));
        if trial.is_finite() && trial <= fy - g2 / (S::two() * l) {
            bt.l_current = l;
            return Ok(l);
        }
        l = l * bt.growth;
        if l > bt.limit {
            return Err(Error::BacktrackingFailure {
                limit: bt.limit.as_f64(),
            });
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Gd,
    Nag3,
    Nag2,
    ProxNag,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Gd, Method::Nag3, Method::Nag2, Method::ProxNag];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gd => "gd",
            Method::Nag3 => "nag3",
            Method::Nag2 => "nag2",
            Method::ProxNag => "proxnag",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown optimizer `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule<S> {
    Fixed(S),
    Backtracking(BacktrackState<S>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig<S> {
    pub method: Method,
    pub gamma: S,
    pub mu: S,
    pub step: StepRule<S>,
    pub budget: usize,
    /// Stop once `F(x_n) - F* <= target_gap` (needs a known `F*`).
    pub target_gap: Option<S>,
    /// Stop once the composite gradient map at `x_n` has norm `<= grad_tol`.
    pub grad_tol: Option<S>,
    /// A gap above `divergence_factor * gap_0` counts as divergence.
    pub divergence_factor: S,
    /// Compute energy, curvature and derivation-difference columns.
    pub monitors: bool,
}

impl<S: Scalar> RunConfig<S> {
    pub fn new(method: Method, gamma: S, mu: S, step: StepRule<S>, budget: usize) -> Self {
        RunConfig {
            method,
            gamma,
            mu,
            step,
            budget,
            target_gap: None,
            grad_tol: None,
            divergence_factor: S::lit(1e6),
            monitors: true,
        }
    }

    pub fn with_target(mut self, gap: S) -> Self {
        self.target_gap = Some(gap);
        self
    }

    pub fn with_grad_tol(mut self, tol: S) -> Self {
        self.grad_tol = Some(tol);
        self
    }

    pub fn without_monitors(mut self) -> Self {
        self.monitors = false;
        self
    }
}

/// Per-iterate record. Row `n >= 1` carries the curvature diagnostics of the
/// pair `(x_{n-1}, y_{n-1})` used by the step that produced `x_n` (for
/// gradient descent, the pair `(x_n, x_{n-1})`).
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow<S> {
    pub n: usize,
    pub f_gap: Option<S>,
    pub lyapunov_e: Option<S>,
    pub grad_norm: S,
    pub curvature_est: Option<S>,
    pub deriv_diff: Option<S>,
    /// `1 / s` of the step that produced this row.
    pub step_l: Option<S>,
    /// Cumulative optimizer time, monitors excluded.
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    BudgetExhausted,
    TargetReached,
    StationaryReached,
    Diverged { iteration: usize, reason: String },
    Failed { iteration: usize, error: Error },
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::BudgetExhausted => "budget",
            RunStatus::TargetReached => "target",
            RunStatus::StationaryReached => "stationary",
            RunStatus::Diverged { .. } => "diverged",
            RunStatus::Failed { .. } => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord<S> {
    pub method: Method,
    pub rows: Vec<TrajectoryRow<S>>,
    pub status: RunStatus,
    pub final_x: Point<S>,
}

impl<S: Scalar> TrajectoryRecord<S> {
    /// First iteration with gap at most `eps`.
    pub fn iterations_to(&self, eps: S) -> Option<usize> {
        self.first_row_below(eps).map(|r| r.n)
    }

    pub fn seconds_to(&self, eps: S) -> Option<f64> {
        self.first_row_below(eps).map(|r| r.elapsed_s)
    }

    fn first_row_below(&self, eps: S) -> Option<&TrajectoryRow<S>> {
        self.rows.iter().find(|r| r.f_gap.is_some_and(|g| g <= eps))
    }

    pub fn step_ls(&self) -> Vec<S> {
        self.rows.iter().filter_map(|r| r.step_l).collect()
    }

    pub fn negative_curvature_count(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.curvature_est.is_some_and(|c| c < S::zero()))
            .count()
    }

    pub fn gaps(&self) -> Vec<S> {
        self.rows.iter().filter_map(|r| r.f_gap).collect()
    }

    pub fn energies(&self) -> Vec<S> {
        self.rows.iter().filter_map(|r| r.lyapunov_e).collect()
    }
}

struct Stepper<S: Scalar> {
    rule: StepRule<S>,
    gamma: S,
    mu: S,
}

impl<S: Scalar> Stepper<S> {
    fn current_s(&self) -> S {
        match self.rule {
            StepRule::Fixed(s) => s,
            StepRule::Backtracking(bt) => self.cap(S::one() / bt.l_current),
        }
    }

    /// Keeps `gamma sqrt(mu s) <= 1` when backtracking finds a tiny `L`.
    fn cap(&self, s: S) -> S {
        s.min(S::one() / (self.gamma * self.gamma * self.mu))
    }

    fn step_at<O: Oracle<S> + ?Sized>(&mut self, oracle: &O, y: &Point<S>) -> Result<S> {
        match &mut self.rule {
            StepRule::Fixed(s) => Ok(*s),
            StepRule::Backtracking(bt) => {
                let l = backtrack_l(oracle, y, bt)?;
                Ok(self.cap(S::one() / l))
            }
        }
    }
}

/// Runs `cfg.method` from `x0`. Divergence and step failures end the run and
/// are reported in [`TrajectoryRecord::status`]; configuration errors are
/// returned as `Err`.
pub fn run<S: Scalar>(
    problem: &CompositeProblem<S>,
    x0: &Point<S>,
    cfg: &RunConfig<S>,
) -> Result<TrajectoryRecord<S>> {
    x0.ensure_dim(problem.dim())?;
    match cfg.method {
        Method::Nag3 | Method::Nag2 if !problem.is_smooth() => {
            return param(format!(
                "{} needs g = 0; use proxnag for composite problems",
                cfg.method
            ))
        }
        Method::ProxNag => require_unit_gamma(cfg.gamma)?,
        _ => {}
    }
    let accelerated = cfg.method != Method::Gd;
    if accelerated {
        make_nag_params(cfg.gamma, cfg.mu, S::epsilon())?;
    }
    if let StepRule::Fixed(s) = cfg.step {
        if accelerated {
            make_nag_params(cfg.gamma, cfg.mu, s)?;
        } else if !(s > S::zero()) {
            return param(format!("step size must be positive, got {s}"));
        }
    }

    let f = problem.smooth();
    let fstar = problem.min_value();
    let xstar = problem.minimizer().cloned();
    let mut stepper = Stepper {
        rule: cfg.step,
        gamma: cfg.gamma,
        mu: cfg.mu,
    };

    let f0 = problem.checked_value(x0)?;
    let gap0 = fstar.map(|fs| f0 - fs);
    let mut state = NagState::new(x0.clone());
    // coefficients of the previous step, used for the extrapolation
    let mut prev_s = stepper.current_s();
    let mut elapsed = 0.0f64;
    let mut rows = Vec::with_capacity(cfg.budget + 1);

    let energy = |x_gap: Option<S>, z: &Point<S>| -> Option<S> {
        match (x_gap, &xstar) {
            (Some(g), Some(xs)) if cfg.monitors && accelerated => Some(energy_from_parts(g, z, xs, cfg.mu)),
            _ => None,
        }
    };
    let grad_norm = |x: &Point<S>, s: S| -> S {
        problem
            .prox_gradient_step(x, s)
            .map(|(_, m)| m.norm())
            .unwrap_or(S::nan())
    };

    rows.push(TrajectoryRow {
        n: 0,
        f_gap: gap0,
        lyapunov_e: energy(gap0, &state.z),
        grad_norm: grad_norm(x0, prev_s),
        curvature_est: None,
        deriv_diff: None,
        step_l: None,
        elapsed_s: 0.0,
    });
    let mut status = stop_status(cfg, &rows[0]);

    let mut n = 0;
    while status.is_none() && n < cfg.budget {
        let clock = Instant::now();
        let outcome: Result<(NagState<S>, S, Point<S>, Point<S>)> = (|| {
            match cfg.method {
                Method::Gd => {
                    let s = stepper.step_at(f, &state.x)?;
                    let (t, _) = problem
                        .prox_gradient_step(&state.x, s)
                        .map_err(|e| as_divergence(e, n, &state.x))?;
                    let t = finite_or_diverge(t, n, &state.x)?;
                    let pair = (t.clone(), state.x.clone());
                    let next = NagState {
                        x_prev: state.x.clone(),
                        y_prev: state.x.clone(),
                        y: state.x.clone(),
                        z: t.clone(),
                        x: t,
                        n: n + 1,
                    };
                    Ok((next, s, pair.0, pair.1))
                }
                Method::Nag3 | Method::ProxNag => {
                    let alpha = make_nag_params(cfg.gamma, cfg.mu, prev_s)?.alpha;
                    let y = extrapolate(&state, alpha);
                    let s = stepper.step_at(f, &y)?;
                    let p = make_nag_params(cfg.gamma, cfg.mu, s)?;
                    let (t, map) = problem
                        .prox_gradient_step(&y, s)
                        .map_err(|e| as_divergence(e, n, &state.x))?;
                    let pair_x = state.x.clone();
                    let next = advance(&state, y.clone(), t, &map, &p)?;
                    Ok((next, s, pair_x, y))
                }
                Method::Nag2 => {
                    let p_prev = make_nag_params(cfg.gamma, cfg.mu, prev_s)?;
                    let y = two_point_extrapolate(&state.x, &state.x_prev, &state.y_prev, &p_prev);
                    let s = stepper.step_at(f, &y)?;
                    let g = gradient_or_diverge(f, &y, n, &state.x)?;
                    let t = finite_or_diverge(Point::offset(&y, -s, &g), n, &state.x)?;
                    let next = NagState {
                        x_prev: state.x.clone(),
                        y_prev: y.clone(),
                        z: t.clone(),
                        x: t,
                        y: y.clone(),
                        n: n + 1,
                    };
                    Ok((next, s, state.x.clone(), y))
                }
            }
        })();
        elapsed += clock.elapsed().as_secs_f64();

        let (mut next, s, pair_x, pair_y) = match outcome {
            Ok(v) => v,
            Err(Error::Divergence { iteration, reason, .. }) => {
                status = Some(RunStatus::Diverged { iteration, reason });
                break;
            }
            Err(error) => {
                status = Some(RunStatus::Failed { iteration: n, error });
                break;
            }
        };
        n += 1;
        prev_s = s;

        let value = problem.value(&next.x);
        let gap = fstar.map(|fs| value - fs);
        if cfg.method == Method::Nag2 {
            // recover z_n from y_n = alpha x_n + (1 - alpha) z_n
            let p = make_nag_params(cfg.gamma, cfg.mu, s)?;
            let y_next = two_point_extrapolate(&next.x, &next.x_prev, &next.y_prev, &p);
            next.z = Point::lincomb(
                S::one() / (S::one() - p.alpha),
                &y_next,
                -p.alpha / (S::one() - p.alpha),
                &next.x,
            );
        }
        let (curvature_est, deriv_diff) = if cfg.monitors {
            (
                curvature_estimate(f, &pair_x, &pair_y).ok(),
                Some(derivation_difference(f, &pair_x, &pair_y)).filter(|d| d.is_finite()),
            )
        } else {
            (None, None)
        };
        rows.push(TrajectoryRow {
            n,
            f_gap: gap,
            lyapunov_e: energy(gap, &next.z),
            grad_norm: grad_norm(&next.x, stepper.current_s()),
            curvature_est,
            deriv_diff,
            step_l: Some(S::one() / s),
            elapsed_s: elapsed,
        });
        state = next;

        let last = rows.last().expect("row just pushed");
        let exploded = match (gap, gap0) {
            (Some(g), Some(g0)) => g > cfg.divergence_factor * g0.max(S::min_positive_value()),
            _ => false,
        };
        if !value.is_finite() || exploded {
            status = Some(RunStatus::Diverged {
                iteration: n,
                reason: if exploded {
                    "gap exceeded the divergence threshold".into()
                } else {
                    "non-finite objective value".into()
                },
            });
        } else {
            status = stop_status(cfg, last);
        }
    }

    Ok(TrajectoryRecord {
        method: cfg.method,
        rows,
        status: status.unwrap_or(RunStatus::BudgetExhausted),
        final_x: state.x,
    })
}

fn as_divergence<S: Scalar>(e: Error, n: usize, last: &Point<S>) -> Error {
    match e {
        Error::OracleEvaluation { .. } => divergence(n, "non-finite gradient", last),
        other => other,
    }
}

fn stop_status<S: Scalar>(cfg: &RunConfig<S>, row: &TrajectoryRow<S>) -> Option<RunStatus> {
    if let (Some(t), Some(g)) = (cfg.target_gap, row.f_gap) {
        if g <= t {
            return Some(RunStatus::TargetReached);
        }
    }
    if let Some(tol) = cfg.grad_tol {
        if row.grad_norm <= tol {
            return Some(RunStatus::StationaryReached);
        }
    }
    None
}
