//! Sampled estimates of the geometric constants around a minimizer (strong
//! quasar convexity, PL, error bound, RSI, quadratic growth, acute angle,
//! secant curvature) and the implications between them.
//!
//! Every estimate is an infimum (or supremum) over a finite sample, hence
//! an empirical upper bound on the true constant (lower bound for sups).

use crate::error::{param, Error, Result};
use crate::oracles::{checked_gradient, checked_value, hvp_auto, Oracle, QuasarSpec};
use crate::point::Point;
use crate::scalar::Scalar;
use crate::testfunctions::CoefficientRng;

/// Samples closer than `EXCLUSION_REL * (1 + |x*|)` to the minimizer are
/// left out of ratio estimators.
pub const EXCLUSION_REL: f64 = 1e-8;
/// Gradients below this norm are skipped by the acute-angle estimator.
pub const UAAC_GRAD_FLOOR: f64 = 1e-12;
/// Slack threshold under which a sample counts as an SQC violation.
pub const SLACK_TOL: f64 = 1e-9;
pub const DEFAULT_QUAD_NODES: usize = 129;
const MAX_REPORTED_VIOLATIONS: usize = 32;
const PAIR_BUDGET: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub enum SampleMode<S> {
    /// Uniform in the ball of `radius` around the reference point.
    UniformBall,
    /// Points along the signed coordinate axes through the reference point,
    /// at radii `radius * j / levels`.
    RayGrid,
    /// Explicit points, e.g. optimizer iterates.
    TrajectoryPoints(Vec<Point<S>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePlan<S> {
    pub mode: SampleMode<S>,
    pub count: usize,
    pub radius: S,
    pub seed: u64,
}

impl<S: Scalar> SamplePlan<S> {
    pub fn uniform_ball(count: usize, radius: S, seed: u64) -> Self {
        SamplePlan {
            mode: SampleMode::UniformBall,
            count,
            radius,
            seed,
        }
    }

    pub fn ray_grid(count: usize, radius: S) -> Self {
        SamplePlan {
            mode: SampleMode::RayGrid,
            count,
            radius,
            seed: 0,
        }
    }

    pub fn trajectory(points: Vec<Point<S>>) -> Self {
        SamplePlan {
            count: points.len(),
            mode: SampleMode::TrajectoryPoints(points),
            radius: S::one(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return param("sample count must be at least 1");
        }
        if !(self.radius > S::zero()) {
            return param(format!("sample radius must be positive, got {}", self.radius));
        }
        Ok(())
    }

    /// Materializes the sample points around `center`.
    pub fn points(&self, center: &Point<S>) -> Result<Vec<Point<S>>> {
        self.validate()?;
        let dim = center.dim();
        match &self.mode {
            SampleMode::UniformBall => {
                let mut rng = CoefficientRng::new(self.seed);
                Ok((0..self.count)
                    .map(|_| center + &rng.in_ball(dim, self.radius))
                    .collect())
            }
            SampleMode::RayGrid => {
                let ndirs = 2 * dim;
                let levels = self.count.div_ceil(ndirs);
                Ok((0..self.count)
                    .map(|k| {
                        let (dir, level) = (k / levels, k % levels);
                        let sign = if dir % 2 == 0 { S::one() } else { -S::one() };
                        let r = self.radius * S::from_count(level + 1) / S::from_count(levels);
                        let mut p = center.clone();
                        p.as_mut_slice()[dir / 2] = p[dir / 2] + sign * r;
                        p
                    })
                    .collect())
            }
            SampleMode::TrajectoryPoints(pts) => {
                for p in pts {
                    p.ensure_dim(dim)?;
                }
                Ok(pts.iter().take(self.count).cloned().collect())
            }
        }
    }
}

fn reference_of<S: Scalar, O: Oracle<S> + ?Sized>(oracle: &O) -> Result<(Point<S>, S)> {
    let xstar = oracle
        .minimizer()
        .cloned()
        .ok_or_else(|| Error::Estimation("minimizer unknown".into()))?;
    let fstar = match oracle.min_value() {
        Some(v) => v,
        None => checked_value(oracle, &xstar)?,
    };
    Ok((xstar, fstar))
}

fn exclusion_radius<S: Scalar>(xstar: &Point<S>) -> S {
    S::lit(EXCLUSION_REL) * (S::one() + xstar.norm())
}

/// `F* - F(x) - (1/gamma) <g, x* - x> - (mu/2) |x* - x|^2`
fn sqc_slack<S: Scalar>(fref: S, f: S, g: &Point<S>, d: &Point<S>, gamma: S, mu: S) -> S {
    // d = x - x*, so <g, x* - x> = -<g, d>
    fref - f + g.dot(d) / gamma - mu * S::half() * d.norm_sq()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqcCheck<S> {
    /// Smallest slack over the sample; `>= -SLACK_TOL` means consistent.
    pub min_slack: S,
    pub worst_point: Point<S>,
    /// The most negative slacks below `-SLACK_TOL`, worst first.
    pub violations: Vec<(Point<S>, S)>,
    pub violation_count: usize,
    /// Per-sample distance to the reference point and slack, in sample order.
    pub distances: Vec<S>,
    pub slacks: Vec<S>,
}

impl<S: Scalar> SqcCheck<S> {
    pub fn passes(&self) -> bool {
        self.min_slack >= -S::lit(SLACK_TOL)
    }
}

/// Evaluates the strong quasar convexity slack at every sample of `plan`,
/// taken around `spec.reference_point`.
///
/// A `gamma < 1` claim w.r.t. a reference point with nonzero gradient is
/// rejected: such a point cannot be a quasar point.
pub fn check_sqc<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    spec: &QuasarSpec<S>,
    plan: &SamplePlan<S>,
) -> Result<SqcCheck<S>> {
    let xref = &spec.reference_point;
    xref.ensure_dim(oracle.dim())?;
    let is_min = oracle.minimizer() == Some(xref);
    let fref = match (is_min, oracle.min_value()) {
        (true, Some(v)) => v,
        _ => checked_value(oracle, xref)?,
    };
    if spec.gamma < S::one() {
        let gn = checked_gradient(oracle, xref)?.norm();
        if gn > S::lit(1e-8) * (S::one() + fref.abs()) {
            return param(format!(
                "gamma = {} < 1 is impossible w.r.t. a reference point with nonzero gradient (|grad| = {:e}); only gamma = 1 can hold there",
                spec.gamma,
                gn.as_f64()
            ));
        }
    }
    let pts = plan.points(xref)?;
    let mut distances = Vec::with_capacity(pts.len());
    let mut slacks = Vec::with_capacity(pts.len());
    let mut worst = (S::infinity(), 0usize);
    let mut bad: Vec<(usize, S)> = Vec::new();
    for (i, x) in pts.iter().enumerate() {
        let f = checked_value(oracle, x)?;
        let g = checked_gradient(oracle, x)?;
        let d = x - xref;
        let s = sqc_slack(fref, f, &g, &d, spec.gamma, spec.mu);
        if s < worst.0 {
            worst = (s, i);
        }
        if s < -S::lit(SLACK_TOL) {
            bad.push((i, s));
        }
        distances.push(d.norm());
        slacks.push(s);
    }
    let violation_count = bad.len();
    bad.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let violations = bad
        .into_iter()
        .take(MAX_REPORTED_VIOLATIONS)
        .map(|(i, s)| (pts[i].clone(), s))
        .collect();
    Ok(SqcCheck {
        min_slack: worst.0,
        worst_point: pts[worst.1].clone(),
        violations,
        violation_count,
        distances,
        slacks,
    })
}

/// Empirical constants over a sample. See the module docs on bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantEstimates<S> {
    /// `inf |g|^2 / (2 (F - F*))`
    pub mu_pl: S,
    /// `inf |g| / |x - x*|`
    pub theta_eb: S,
    /// `inf <g, x - x*> / |x - x*|^2`; negative when RSI fails.
    pub nu_rsi: S,
    /// `inf 2 (F - F*) / |x - x*|^2`
    pub mu_qg: S,
    /// `sup 2 (F - F*) / |x - x*|^2`, the upper quadratic growth constant.
    pub upper_qg: S,
    /// `inf` cosine between `g` and `x - x*`.
    pub a_uaac: S,
    /// Extremes of the secant curvature `<g(x) - g(y), x - y> / |x - y|^2`
    /// over sample pairs (the minimizer included).
    pub curvature_lo: S,
    pub curvature_hi: S,
    /// Worst slack for the oracle's declared `(gamma, mu)`, if any.
    pub sqc_slack: Option<S>,
    pub used: usize,
    pub excluded: usize,
    /// Samples with `|g| < UAAC_GRAD_FLOOR`; nonzero means critical points
    /// away from the minimizer, which rule out the acute angle condition.
    pub uaac_skipped: usize,
    pub pl_skipped: usize,
}

pub fn estimate_constants<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    plan: &SamplePlan<S>,
) -> Result<ConstantEstimates<S>> {
    let (xstar, fstar) = reference_of(oracle)?;
    let pts = plan.points(&xstar)?;
    let excl = exclusion_radius(&xstar);
    let declared = oracle.declared_quasar();

    let inf = S::infinity();
    let mut est = ConstantEstimates {
        mu_pl: inf,
        theta_eb: inf,
        nu_rsi: inf,
        mu_qg: inf,
        upper_qg: S::zero(),
        a_uaac: inf,
        curvature_lo: inf,
        curvature_hi: -inf,
        sqc_slack: declared.map(|_| inf),
        used: 0,
        excluded: 0,
        uaac_skipped: 0,
        pl_skipped: 0,
    };
    let mut kept: Vec<(Point<S>, Point<S>)> = vec![(xstar.clone(), checked_gradient(oracle, &xstar)?)];

    for x in pts {
        let d = &x - &xstar;
        let dn = d.norm();
        if dn < excl {
            est.excluded += 1;
            continue;
        }
        let f = checked_value(oracle, &x)?;
        let g = checked_gradient(oracle, &x)?;
        let gap = f - fstar;
        let gn = g.norm();
        let ip = g.dot(&d);
        let d2 = dn * dn;

        est.theta_eb = est.theta_eb.min(gn / dn);
        est.nu_rsi = est.nu_rsi.min(ip / d2);
        est.mu_qg = est.mu_qg.min(S::two() * gap / d2);
        est.upper_qg = est.upper_qg.max(S::two() * gap / d2);
        if gap > S::zero() {
            est.mu_pl = est.mu_pl.min(gn * gn / (S::two() * gap));
        } else {
            est.pl_skipped += 1;
        }
        if gn < S::lit(UAAC_GRAD_FLOOR) {
            est.uaac_skipped += 1;
        } else {
            let c = (ip / (gn * dn)).max(-S::one()).min(S::one());
            est.a_uaac = est.a_uaac.min(c);
        }
        if let (Some((gamma, mu)), Some(s)) = (declared, est.sqc_slack.as_mut()) {
            *s = s.min(sqc_slack(fstar, f, &g, &d, gamma, mu));
        }
        est.used += 1;
        kept.push((x, g));
    }
    if est.used == 0 {
        return Err(Error::Estimation(
            "every sample lies in the exclusion zone around the minimizer".into(),
        ));
    }
    if est.mu_pl == inf {
        return Err(Error::Estimation("no sample with a positive gap".into()));
    }
    if est.a_uaac == inf {
        return Err(Error::Estimation("every sample is a critical point".into()));
    }
    let (lo, hi) = secant_curvature_range(&kept, PAIR_BUDGET);
    est.curvature_lo = lo;
    est.curvature_hi = hi;
    Ok(est)
}

/// Min and max secant curvature over pairs `(i, i + stride)` for growing
/// strides, until the pair budget is spent (all pairs for small samples).
fn secant_curvature_range<S: Scalar>(pts: &[(Point<S>, Point<S>)], budget: usize) -> (S, S) {
    let (mut lo, mut hi) = (S::infinity(), -S::infinity());
    let mut spent = 0;
    'outer: for stride in 1..pts.len() {
        for i in 0..pts.len() - stride {
            let (x, gx) = &pts[i];
            let (y, gy) = &pts[i + stride];
            let dx = x - y;
            let n2 = dx.norm_sq();
            if n2.sqrt() < S::lit(EXCLUSION_REL) * (S::one() + x.norm()) {
                continue;
            }
            let c = (gx - gy).dot(&dx) / n2;
            lo = lo.min(c);
            hi = hi.max(c);
            spent += 1;
            if spent >= budget {
                break 'outer;
            }
        }
    }
    (lo, hi)
}

/// Constants implied by `(gamma, mu)`-SQC: `(mu_pl, mu_qg, nu_rsi)` =
/// `(mu gamma^2, gamma mu / (2 - gamma), gamma mu / (2 - gamma))`.
pub fn sqc_implies<S: Scalar>(gamma: S, mu: S) -> Result<(S, S, S)> {
    if !(gamma > S::zero() && gamma <= S::one()) {
        return param(format!("gamma must lie in (0, 1], got {gamma}"));
    }
    if !(mu > S::zero()) {
        return param(format!("mu must be positive, got {mu}"));
    }
    let qg = gamma * mu / (S::two() - gamma);
    Ok((mu * gamma * gamma, qg, qg))
}

/// SQC constant `mu' = mu_pl a / gamma - L/2` granted by PL + L-smooth + the
/// acute angle condition with constant `a`, for `gamma < 2 mu_pl a / L`.
pub fn uaac_implies_sqc<S: Scalar>(mu_pl: S, l: S, a: S, gamma: S) -> Result<S> {
    if !(mu_pl > S::zero() && mu_pl <= l) {
        return param(format!("need 0 < mu_pl <= L, got mu_pl = {mu_pl}, L = {l}"));
    }
    if !(a > S::zero() && a <= S::one()) {
        return param(format!("acute angle constant must lie in (0, 1], got {a}"));
    }
    let bound = S::two() * mu_pl * a / l;
    if !(gamma > S::zero() && gamma < bound && gamma <= S::one()) {
        return param(format!(
            "gamma = {gamma} must satisfy 0 < gamma < 2 mu_pl a / L = {bound} and gamma <= 1"
        ));
    }
    Ok(mu_pl * a / gamma - l * S::half())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainKind {
    /// Implication between true constants, applied to sampled estimates.
    Lemma,
    /// Holds for sampled estimates by construction.
    Sampled,
    /// Consequence of the oracle's declared `(gamma, mu)`.
    Declared,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainItem<S> {
    pub name: &'static str,
    pub kind: ChainKind,
    pub lhs: S,
    pub rhs: S,
}

impl<S: Scalar> ChainItem<S> {
    /// `lhs >= rhs` up to `rel_tol` relative to the larger magnitude.
    pub fn holds(&self, rel_tol: S) -> bool {
        let scale = self.lhs.abs().max(self.rhs.abs()).max(S::min_positive_value());
        self.lhs >= self.rhs - rel_tol * scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport<S> {
    pub estimates: ConstantEstimates<S>,
    /// Smoothness constant used by the smoothness-based items.
    pub smoothness: S,
    pub items: Vec<ChainItem<S>>,
}

impl<S: Scalar> ChainReport<S> {
    pub fn all_hold(&self, rel_tol: S) -> bool {
        self.items.iter().all(|i| i.holds(rel_tol))
    }

    pub fn failures(&self, rel_tol: S) -> Vec<&ChainItem<S>> {
        self.items.iter().filter(|i| !i.holds(rel_tol)).collect()
    }
}

/// Evaluates the PL / EB / RSI / QG implication chain on one sample set.
///
/// `L` is the declared smoothness when present, else the sampled
/// `curvature_hi`.
pub fn lemma_chain_check<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    plan: &SamplePlan<S>,
) -> Result<ChainReport<S>> {
    let e = estimate_constants(oracle, plan)?;
    let l = oracle.declared_smoothness().unwrap_or(e.curvature_hi);
    let item = |name, kind, lhs, rhs| ChainItem { name, kind, lhs, rhs };
    let mut items = vec![
        item("pl => eb", ChainKind::Lemma, e.theta_eb, e.mu_pl),
        item(
            "eb + smooth => pl",
            ChainKind::Lemma,
            e.mu_pl,
            e.theta_eb * e.theta_eb / l,
        ),
        item(
            "pl + qg => eb",
            ChainKind::Sampled,
            e.theta_eb * e.theta_eb,
            e.mu_pl * e.mu_qg,
        ),
        item(
            "eb + uaac => rsi",
            if e.a_uaac >= S::zero() {
                ChainKind::Sampled
            } else {
                ChainKind::Lemma
            },
            e.nu_rsi,
            e.theta_eb * e.a_uaac,
        ),
        item(
            "eb + upper qg => pl",
            ChainKind::Sampled,
            e.mu_pl,
            e.theta_eb * e.theta_eb / e.upper_qg,
        ),
        item("rsi => eb", ChainKind::Sampled, e.theta_eb, e.nu_rsi),
    ];
    if let Some((gamma, mu)) = oracle.declared_quasar() {
        let (pl, qg, rsi) = sqc_implies(gamma, mu)?;
        items.push(item("sqc => pl", ChainKind::Declared, e.mu_pl, pl));
        items.push(item("sqc => qg", ChainKind::Declared, e.mu_qg, qg));
        items.push(item("sqc => rsi", ChainKind::Declared, e.nu_rsi, rsi));
    }
    Ok(ChainReport {
        estimates: e,
        smoothness: l,
        items,
    })
}

/// Exact segment average from the fundamental theorem of calculus:
/// `<g(x* + t(x - x*)) - g(x*), x - x*> / (t |x - x*|^2)`.
pub fn segment_convexity_secant<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    x: &Point<S>,
    t_frac: S,
) -> Result<S> {
    let (xstar, d) = segment_setup(oracle, x, t_frac)?;
    let end = Point::offset(&xstar, t_frac, &d);
    let dg = &checked_gradient(oracle, &end)? - &checked_gradient(oracle, &xstar)?;
    Ok(dg.dot(&d) / (t_frac * d.norm_sq()))
}

fn segment_setup<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    x: &Point<S>,
    t_frac: S,
) -> Result<(Point<S>, Point<S>)> {
    let (xstar, _) = reference_of(oracle)?;
    x.ensure_dim(xstar.dim())?;
    if !(t_frac > S::zero() && t_frac <= S::one()) {
        return param(format!("t_frac must lie in (0, 1], got {t_frac}"));
    }
    let d = x - &xstar;
    if d.norm() < exclusion_radius(&xstar) {
        return Err(Error::DegenerateSegment);
    }
    Ok((xstar, d))
}

/// Average of the directional curvature `<H(x* + s d) d, d> / |d|^2`,
/// `d = x - x*`, over `s` in `[0, t_frac]`.
///
/// Composite Simpson with `quad_nodes` (odd, >= 3) nodes on C² oracles;
/// oracles that are not C² use the exact secant form instead.
pub fn average_segment_convexity<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    x: &Point<S>,
    t_frac: S,
    quad_nodes: usize,
) -> Result<S> {
    if quad_nodes < 3 || quad_nodes % 2 == 0 {
        return param(format!("Simpson needs an odd node count >= 3, got {quad_nodes}"));
    }
    if !oracle.is_c2() {
        return segment_convexity_secant(oracle, x, t_frac);
    }
    let (xstar, d) = segment_setup(oracle, x, t_frac)?;
    let dn2 = d.norm_sq();
    let intervals = quad_nodes - 1;
    let h = t_frac / S::from_count(intervals);
    let mut acc = S::zero();
    for k in 0..quad_nodes {
        let p = Point::offset(&xstar, h * S::from_count(k), &d);
        let hv = hvp_auto(oracle, &p, &d)?;
        let w = if k == 0 || k == intervals {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc = acc + S::lit(w) * hv.dot(&d) / dn2;
    }
    // (1/t) * (h/3) * sum
    Ok(acc * h / (S::lit(3.0) * t_frac))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOutcome<S> {
    /// First radius of the schedule whose minimum sampled curvature is positive.
    pub radius: Option<S>,
    /// `(radius, min sampled curvature)` for every radius visited.
    pub visited: Vec<(S, S)>,
}

/// Looks for a ball around the minimizer on which every sampled secant
/// curvature is positive, visiting `radii` in order.
///
/// Each radius draws `samples` points in the ball; curvature is sampled on
/// short segments `[x, x + 1e-4 r u]` with random unit `u` and on pairs of
/// sample points.
pub fn local_strong_convexity_probe<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    radii: &[S],
    samples: usize,
    seed: u64,
) -> Result<ProbeOutcome<S>> {
    let (xstar, _) = reference_of(oracle)?;
    let dim = xstar.dim();
    let mut rng = CoefficientRng::new(seed);
    let mut visited = Vec::with_capacity(radii.len());
    for &r in radii {
        let plan = SamplePlan::uniform_ball(samples, r, rng.next_u64());
        let pts = plan.points(&xstar)?;
        let mut kept = Vec::with_capacity(2 * pts.len());
        let mut lo = S::infinity();
        for x in pts {
            let u: Point<S> = rng.unit_sphere(dim);
            let hstep = S::lit(1e-4) * r;
            let y = Point::offset(&x, hstep, &u);
            let gx = checked_gradient(oracle, &x)?;
            let gy = checked_gradient(oracle, &y)?;
            lo = lo.min((&gy - &gx).dot(&u) / hstep);
            kept.push((x, gx));
        }
        let (plo, _) = secant_curvature_range(&kept, PAIR_BUDGET);
        lo = lo.min(plo);
        visited.push((r, lo));
        if lo > S::zero() {
            return Ok(ProbeOutcome {
                radius: Some(r),
                visited,
            });
        }
    }
    Ok(ProbeOutcome {
        radius: None,
        visited,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqcFit<S> {
    pub gamma: S,
    /// Largest `mu` with nonnegative slack on every sample.
    pub mu: S,
}

/// Heuristic joint fit: for each `gamma` of the grid, the largest `mu`
/// consistent with the sample (solved exactly, the slack is affine in `mu`).
/// Entries with no positive `mu` are dropped.
pub fn fit_sqc_grid<S: Scalar, O: Oracle<S> + ?Sized>(
    oracle: &O,
    plan: &SamplePlan<S>,
    gammas: &[S],
) -> Result<Vec<SqcFit<S>>> {
    let (xstar, fstar) = reference_of(oracle)?;
    let excl = exclusion_radius(&xstar);
    let mut rows = Vec::new();
    for x in plan.points(&xstar)? {
        let d = &x - &xstar;
        if d.norm() < excl {
            continue;
        }
        let f = checked_value(oracle, &x)?;
        let g = checked_gradient(oracle, &x)?;
        rows.push((fstar - f, g.dot(&d), d.norm_sq()));
    }
    if rows.is_empty() {
        return Err(Error::Estimation("no usable sample".into()));
    }
    let mut fits = Vec::new();
    for &gamma in gammas {
        if !(gamma > S::zero() && gamma <= S::one()) {
            return param(format!("gamma must lie in (0, 1], got {gamma}"));
        }
        let mu = rows
            .iter()
            .map(|&(df, ip, d2)| S::two() * (df + ip / gamma) / d2)
            .fold(S::infinity(), S::min);
        if mu > S::zero() {
            fits.push(SqcFit { gamma, mu });
        }
    }
    Ok(fits)
}

/// Grid entry with the best accelerated rate proxy `gamma * sqrt(mu)`.
pub fn best_fit<S: Scalar>(fits: &[SqcFit<S>]) -> Option<SqcFit<S>> {
    fits.iter()
        .copied()
        .max_by(|a, b| {
            (a.gamma * a.mu.sqrt())
                .partial_cmp(&(b.gamma * b.mu.sqrt()))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::FnOracle;
    use crate::testfunctions::{
        build_experiment_fn, PathologicalOneD, PathologicalOracle, Quadratic,
    };

    fn half_norm(dim: usize, c: f64) -> FnOracle<f64> {
        FnOracle::new(
            dim,
            move |x: &Point<f64>| 0.5 * c * x.norm_sq(),
            move |x: &Point<f64>| x.scaled(c),
        )
        .with_hvp(move |_x: &Point<f64>, v: &Point<f64>| v.scaled(c))
        .with_minimizer(Point::zeros(dim), 0.0)
    }

    #[test]
    fn ray_grid_layout() {
        let plan = SamplePlan::ray_grid(8, 1.0);
        let pts = plan.points(&Point::new(vec![0.0, 0.0])).unwrap();
        assert_eq!(pts.len(), 8);
        assert_eq!(pts[0].as_slice(), &[0.5, 0.0]);
        assert_eq!(pts[1].as_slice(), &[1.0, 0.0]);
        assert_eq!(pts[2].as_slice(), &[-0.5, 0.0]);
        assert_eq!(pts[7].as_slice(), &[0.0, -1.0]);
    }

    #[test]
    fn plan_validation() {
        assert!(SamplePlan::<f64>::uniform_ball(0, 1.0, 1).validate().is_err());
        assert!(SamplePlan::<f64>::uniform_ball(3, 0.0, 1).validate().is_err());
        let pts = SamplePlan::uniform_ball(50, 2.0, 9)
            .points(&Point::new(vec![1.0, 1.0, 1.0]))
            .unwrap();
        let c = Point::new(vec![1.0, 1.0, 1.0]);
        assert!(pts.iter().all(|p| p.dist(&c) <= 2.0 + 1e-12));
    }

    #[test]
    fn slack_is_zero_in_the_equality_case() {
        let mu = 0.7;
        let o = half_norm(4, mu);
        let spec = QuasarSpec::new(1.0, mu, Point::zeros(4)).unwrap();
        let chk = check_sqc(&o, &spec, &SamplePlan::uniform_ball(500, 3.0, 1)).unwrap();
        assert!(chk.slacks.iter().all(|s| s.abs() < 1e-12));
        assert!(chk.passes());
    }

    #[test]
    fn overclaimed_mu_is_detected() {
        let o = half_norm(1, 1.0);
        let spec = QuasarSpec::new(1.0, 3.0, Point::zeros(1)).unwrap();
        let chk = check_sqc(&o, &spec, &SamplePlan::uniform_ball(100, 1.0, 2)).unwrap();
        assert!(chk.min_slack < 0.0);
        assert!(!chk.passes());
        assert!(chk.violation_count > 0);
        assert!(chk.violations[0].1 <= chk.violations.last().unwrap().1);
    }

    #[test]
    fn gamma_below_one_needs_a_critical_reference() {
        let o = half_norm(2, 1.0);
        let off = QuasarSpec::new(0.5, 0.1, Point::new(vec![1.0, 0.0])).unwrap();
        let err = check_sqc(&o, &off, &SamplePlan::uniform_ball(10, 1.0, 3)).unwrap_err();
        assert!(matches!(err, Error::Parameter(m) if m.contains("gamma = 1")));
        let ok = QuasarSpec::new(1.0, 0.1, Point::new(vec![1.0, 0.0])).unwrap();
        assert!(check_sqc(&o, &ok, &SamplePlan::uniform_ball(10, 1.0, 3)).is_ok());
    }

    #[test]
    fn experiment_fn_satisfies_declared_constants() {
        let o = build_experiment_fn::<f64>(7, 20).unwrap();
        let spec = QuasarSpec::new(1.0, 2.0, Point::zeros(20)).unwrap();
        let chk = check_sqc(&o, &spec, &SamplePlan::uniform_ball(2000, 5.0, 4)).unwrap();
        assert!(chk.min_slack >= -1e-9, "{}", chk.min_slack);
    }

    #[test]
    fn half_norm_constants() {
        let o = half_norm(3, 1.0);
        let e = estimate_constants(&o, &SamplePlan::uniform_ball(300, 2.0, 5)).unwrap();
        for v in [e.mu_pl, e.theta_eb, e.nu_rsi, e.mu_qg, e.upper_qg, e.a_uaac] {
            assert!((v - 1.0).abs() < 1e-12, "{v}");
        }
        assert!((e.curvature_lo - 1.0).abs() < 1e-12);
        assert!((e.curvature_hi - 1.0).abs() < 1e-12);
        assert_eq!(e.uaac_skipped, 0);
    }

    #[test]
    fn diagonal_quadratic_closed_forms() {
        let eig = vec![0.3f64, 1.0, 4.0, 9.0];
        let q = Quadratic::diagonal(&eig, Point::new(vec![1.0, -2.0, 0.5, 0.0])).unwrap();
        let e = estimate_constants(&q, &SamplePlan::ray_grid(64, 1.5)).unwrap();
        for v in [e.mu_pl, e.theta_eb, e.nu_rsi, e.mu_qg, e.curvature_lo] {
            assert!((v - 0.3).abs() < 1e-9, "{v}");
        }
        assert!((e.upper_qg - 9.0).abs() < 1e-9);
        assert!((e.curvature_hi - 9.0).abs() < 1e-9);
        assert!((e.a_uaac - 1.0).abs() < 1e-9);
        assert_eq!(e.excluded, 0);
    }

    #[test]
    fn minimizer_samples_are_excluded() {
        let o = half_norm(2, 1.0);
        let plan = SamplePlan::trajectory(vec![Point::zeros(2), Point::new(vec![1.0, 0.0])]);
        let e = estimate_constants(&o, &plan).unwrap();
        assert_eq!((e.used, e.excluded), (1, 1));
        let plan = SamplePlan::trajectory(vec![Point::zeros(2)]);
        assert!(matches!(
            estimate_constants(&o, &plan),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn qg_kind_has_critical_points_and_positive_growth() {
        let o = PathologicalOracle::new(PathologicalOneD::<f64>::qg());
        let e = estimate_constants(&o, &SamplePlan::ray_grid(2 * 1024, 1.0)).unwrap();
        assert!(e.uaac_skipped > 0);
        assert!(e.theta_eb < 1e-12);
        assert!(e.nu_rsi.abs() < 1e-12);
        assert!(e.mu_pl < 1e-12);
        // true growth constant is 1/7, attained at 7/6 * 2^-n
        assert!(e.mu_qg >= 1.0 / 7.0 - 1e-12);
        let fine = SamplePlan::trajectory(vec![Point::new(vec![7.0 / 12.0]), Point::new(vec![0.4])]);
        let e = estimate_constants(&o, &fine).unwrap();
        assert!((e.mu_qg - 1.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn sqc_kind_curvature_reaches_minus_l() {
        let o = PathologicalOracle::new(PathologicalOneD::sqc(2.0).unwrap()).with_mu(0.1).unwrap();
        let e = estimate_constants(&o, &SamplePlan::uniform_ball(2000, 1.0, 6)).unwrap();
        assert!(e.curvature_lo <= -2.0 + 1e-9, "{}", e.curvature_lo);
        assert!(e.curvature_hi <= 2.0 + 1e-9);
    }

    #[test]
    fn convex_functions_have_nonnegative_curvature() {
        let q = Quadratic::<f64>::random(6, 0.01, 1.0, 3).unwrap();
        let e = estimate_constants(&q, &SamplePlan::uniform_ball(400, 1.0, 7)).unwrap();
        assert!(e.curvature_lo >= 0.01 - 1e-12);
        assert!(e.curvature_hi <= 1.0 + 1e-12);
    }

    #[test]
    fn sqc_implies_examples() {
        assert_eq!(sqc_implies(1.0, 2.0).unwrap(), (2.0, 2.0, 2.0));
        let (pl, qg, rsi) = sqc_implies(0.5f64, 1.0).unwrap();
        assert!((pl - 0.25).abs() < 1e-15);
        assert!((qg - 1.0 / 3.0).abs() < 1e-15);
        assert!((rsi - 1.0 / 3.0).abs() < 1e-15);
        assert!(sqc_implies(0.0, 1.0).is_err());
        assert!(sqc_implies(1.0, -1.0).is_err());
    }

    #[test]
    fn uaac_examples() {
        assert_eq!(uaac_implies_sqc(1.0, 1.0, 1.0, 1.0).unwrap(), 0.5);
        // bound 2 mu a / L = 1 is excluded
        let err = uaac_implies_sqc(0.5, 1.0, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Parameter(m) if m.contains("2 mu_pl a / L = 1")));
        assert!(uaac_implies_sqc(1.0, 1.0, 0.0, 0.5).is_err());
        assert!(uaac_implies_sqc(2.0, 1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn uaac_output_passes_check_on_half_norm() {
        let o = half_norm(3, 1.0);
        let mu = uaac_implies_sqc(1.0, 1.0, 1.0, 0.9).unwrap();
        let spec = QuasarSpec::new(0.9, mu, Point::zeros(3)).unwrap();
        let chk = check_sqc(&o, &spec, &SamplePlan::uniform_ball(500, 4.0, 8)).unwrap();
        assert!(chk.passes());
    }

    #[test]
    fn chain_on_isotropic_quadratic_is_tight() {
        let q = Quadratic::<f64>::isotropic(3, 2.0, Point::new(vec![0.5, 0.5, 0.5])).unwrap();
        let r = lemma_chain_check(&q, &SamplePlan::uniform_ball(200, 1.0, 9)).unwrap();
        for it in &r.items {
            assert!((it.lhs - it.rhs).abs() < 1e-9, "{} {} {}", it.name, it.lhs, it.rhs);
        }
    }

    #[test]
    fn chain_holds_on_experiment_fn() {
        let o = build_experiment_fn::<f64>(11, 10).unwrap();
        let r = lemma_chain_check(&o, &SamplePlan::uniform_ball(2000, 3.0, 10)).unwrap();
        let strict: Vec<_> = r.items.iter().filter(|i| i.kind != ChainKind::Lemma).collect();
        assert!(strict.iter().all(|i| i.holds(1e-6)), "{:?}", r.failures(1e-6));
        // pointwise |g|^2 / 2h >= |g| / r for this degree-2 homogeneous
        // function, so the sampled "pl => eb" item is biased the wrong way
        assert!(r.estimates.theta_eb <= r.estimates.mu_pl);
        assert!(r.estimates.a_uaac > 0.0);
        assert!(r.estimates.mu_pl >= 2.0 - 1e-9);
        assert!(r.estimates.sqc_slack.unwrap() >= -1e-9);
    }

    #[test]
    fn chain_on_qg_kind_is_trivially_consistent() {
        let o = PathologicalOracle::new(PathologicalOneD::<f64>::qg());
        let r = lemma_chain_check(&o, &SamplePlan::ray_grid(512, 1.0)).unwrap();
        assert!(r.estimates.mu_pl < 1e-12);
        let sampled: Vec<_> = r.items.iter().filter(|i| i.kind == ChainKind::Sampled).collect();
        assert!(sampled.iter().all(|i| i.holds(1e-6)));
    }

    #[test]
    fn segment_average_of_scaled_norm_is_mu() {
        let o = half_norm(3, 0.4);
        let x = Point::new(vec![1.0, -2.0, 0.3]);
        let a = average_segment_convexity(&o, &x, 1.0, DEFAULT_QUAD_NODES).unwrap();
        assert!((a - 0.4).abs() < 1e-14);
        assert!(average_segment_convexity(&o, &Point::zeros(3), 1.0, 129).is_err());
        assert!(average_segment_convexity(&o, &x, 1.0, 128).is_err());
        assert!(average_segment_convexity(&o, &x, 0.0, 129).is_err());
    }

    #[test]
    fn simpson_matches_secant_oracle() {
        // F = sum x_i^4 / 4 + |x|^2 / 2: polynomial integrand of degree 2,
        // which Simpson integrates exactly
        let o = FnOracle::new(
            2,
            |x: &Point<f64>| x.as_slice().iter().map(|v| v.powi(4) / 4.0 + v * v / 2.0).sum(),
            |x: &Point<f64>| Point::new(x.as_slice().iter().map(|v| v.powi(3) + v).collect()),
        )
        .with_hvp(|x: &Point<f64>, v: &Point<f64>| {
            Point::new(
                x.as_slice()
                    .iter()
                    .zip(v.as_slice())
                    .map(|(a, b)| (3.0 * a * a + 1.0) * b)
                    .collect(),
            )
        })
        .with_minimizer(Point::zeros(2), 0.0);
        let x = Point::new(vec![0.7, -1.3]);
        for t in [1.0, 0.25] {
            let simpson = average_segment_convexity(&o, &x, t, 5).unwrap();
            let exact = segment_convexity_secant(&o, &x, t).unwrap();
            assert!((simpson - exact).abs() < 1e-13, "{simpson} {exact}");
        }
    }

    #[test]
    fn segment_average_on_experiment_fn() {
        let o = build_experiment_fn::<f64>(3, 10).unwrap();
        let mut rng = CoefficientRng::new(12);
        for _ in 0..20 {
            let x: Point<f64> = rng.in_ball(10, 4.0);
            let a = average_segment_convexity(&o, &x, 1.0, 129).unwrap();
            let b = average_segment_convexity(&o, &x, 1.0, 257).unwrap();
            assert!(a > 1.0);
            assert!((a - b).abs() < 1e-8);
            assert!((a - segment_convexity_secant(&o, &x, 1.0).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn non_c2_routes_to_secant() {
        let o = PathologicalOracle::new(PathologicalOneD::sqc(1.0).unwrap());
        let x = Point::new(vec![0.6]);
        let a = average_segment_convexity(&o, &x, 1.0, 129).unwrap();
        assert_eq!(a, segment_convexity_secant(&o, &x, 1.0).unwrap());
    }

    #[test]
    fn probe_on_quadratic_succeeds_first() {
        let q = Quadratic::<f64>::random(4, 0.1, 1.0, 5).unwrap();
        let out = local_strong_convexity_probe(&q, &[1.0, 0.1, 0.01], 64, 1).unwrap();
        assert_eq!(out.radius, Some(1.0));
        assert_eq!(out.visited.len(), 1);
    }

    #[test]
    fn probe_on_sqc_kind_never_succeeds() {
        let o = PathologicalOracle::new(PathologicalOneD::sqc(1.0).unwrap());
        let radii: Vec<f64> = (0..8).map(|k| 0.5f64.powi(3 * k)).collect();
        let out = local_strong_convexity_probe(&o, &radii, 256, 2).unwrap();
        assert_eq!(out.radius, None);
        assert!(out.visited.iter().all(|&(_, c)| c < -0.9));
    }

    #[test]
    fn probe_on_experiment_fn() {
        let o = build_experiment_fn::<f64>(1, 100).unwrap();
        let out = local_strong_convexity_probe(&o, &[1.0, 1e-2], 500, 3).unwrap();
        assert!(out.radius.is_some());
        // degree-2 homogeneous: the Hessian is scale invariant, so a
        // nonconvex instance fails at every radius alike
        let o = build_experiment_fn::<f64>(1, 2).unwrap();
        let out = local_strong_convexity_probe(&o, &[1.0, 1e-2, 1e-4], 2000, 3).unwrap();
        assert_eq!(out.radius, None);
        assert!(out.visited.iter().all(|&(_, c)| c < -1.0));
    }

    #[test]
    fn grid_fit_on_quadratic() {
        let q = Quadratic::<f64>::diagonal(&[0.5, 2.0], Point::zeros(2)).unwrap();
        let fits = fit_sqc_grid(&q, &SamplePlan::ray_grid(16, 1.0), &[0.5, 1.0]).unwrap();
        // gamma = 1: mu = lambda_min; gamma = 1/2: mu = 3 lambda_min
        assert!((fits[1].mu - 0.5).abs() < 1e-12);
        assert!((fits[0].mu - 1.5).abs() < 1e-12);
        assert_eq!(best_fit(&fits).unwrap().gamma, 1.0);
    }

    #[test]
    fn f32_estimates() {
        let q = Quadratic::<f32>::diagonal(&[0.5, 2.0], Point::zeros(2)).unwrap();
        let e = estimate_constants(&q, &SamplePlan::ray_grid(16, 1.0f32)).unwrap();
        assert!((e.mu_pl - 0.5).abs() < 1e-5);
    }
}
