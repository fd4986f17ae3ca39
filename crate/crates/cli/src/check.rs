//! `check`: sampled geometry constants, SQC slack and the implication chain.
//!
//! All constants are infima over the sample, so they are reported as
//! empirical upper bounds.

use std::fmt::Write as _;
use std::path::PathBuf;

use quasar_core::geometry::{
    check_sqc, lemma_chain_check, ChainReport, SamplePlan, SqcCheck,
};
use quasar_core::QuasarSpec;

use crate::bench::real;
use crate::config::Settings;
use crate::error::{io_err, usage, Result};
use crate::registry::{build, FunctionSpec};

pub struct CheckOutcome {
    pub chain: ChainReport<f64>,
    pub sqc: Option<SqcCheck<f64>>,
    pub report: String,
    pub slack_file: Option<PathBuf>,
}

pub fn plan_from_settings(s: &Settings) -> Result<SamplePlan<f64>> {
    let count = s.parsed_or("samples", 10_000usize)?;
    let radius = s.parsed_or("radius", 1.0)?;
    let plan = match s.get("plan").unwrap_or("ball") {
        "ball" => SamplePlan::uniform_ball(count, radius, s.parsed_or("seed", 0u64)?),
        "rays" => SamplePlan::ray_grid(count, radius),
        other => return usage(format!("unknown plan `{other}` (ball or rays)")),
    };
    plan.validate()?;
    Ok(plan)
}

pub fn run_check(s: &Settings) -> Result<CheckOutcome> {
    let f = build(&FunctionSpec::from_settings(s)?)?;
    let oracle = f.smooth_only("check")?;
    let plan = plan_from_settings(s)?;
    let chain = lemma_chain_check(oracle, &plan)?;

    let gamma = s.number_or_declared("gamma")?.or(f.declared.map(|d| d.0));
    let mu = s.number_or_declared("mu")?.or(f.declared.map(|d| d.1));
    let sqc = match (gamma, mu, oracle.minimizer()) {
        (Some(g), Some(m), Some(xs)) => {
            let spec = QuasarSpec::new(g, m, xs.clone())?;
            Some(check_sqc(oracle, &spec, &plan)?)
        }
        _ => None,
    };

    let e = &chain.estimates;
    let mut r = String::new();
    let _ = writeln!(r, "function {} seed {} dim {}", f.spec.id, f.spec.seed, f.spec.dim);
    let _ = writeln!(
        r,
        "samples used {} excluded {} (empirical upper bounds)",
        e.used, e.excluded
    );
    for (name, v) in [
        ("mu_pl", e.mu_pl),
        ("theta_eb", e.theta_eb),
        ("nu_rsi", e.nu_rsi),
        ("mu_qg", e.mu_qg),
        ("upper_qg", e.upper_qg),
        ("a_uaac", e.a_uaac),
        ("curvature_lo", e.curvature_lo),
        ("curvature_hi", e.curvature_hi),
    ] {
        let _ = writeln!(r, "  {name:<13} {v:.6e}");
    }
    if e.uaac_skipped > 0 {
        let _ = writeln!(
            r,
            "  {} samples with vanishing gradient away from x*: acute angle condition fails",
            e.uaac_skipped
        );
    }
    let _ = writeln!(r, "chain (L = {:.6e}):", chain.smoothness);
    for it in &chain.items {
        let _ = writeln!(
            r,
            "  {:<4} {:<22} {:.6e} >= {:.6e}  [{:?}]",
            if it.holds(1e-6) { "ok" } else { "FAIL" },
            it.name,
            it.lhs,
            it.rhs,
            it.kind
        );
    }
    let mut slack_file = None;
    if let (Some(chk), Some(g), Some(m)) = (&sqc, gamma, mu) {
        let _ = writeln!(
            r,
            "sqc ({g}, {m}): min slack {:.6e}, {} violations -> {}",
            chk.min_slack,
            chk.violation_count,
            if chk.passes() { "consistent" } else { "violated" }
        );
        if let Some(out) = s.get("out") {
            let dir = PathBuf::from(out);
            std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
            let path = dir.join("slacks.csv");
            let mut body = String::from("sample,distance,slack\n");
            for (i, (d, sl)) in chk.distances.iter().zip(&chk.slacks).enumerate() {
                let _ = writeln!(body, "{i},{},{}", real(*d), real(*sl));
            }
            std::fs::write(&path, body).map_err(io_err(&path))?;
            slack_file = Some(path);
        }
    }
    Ok(CheckOutcome {
        chain,
        sqc,
        report: r,
        slack_file,
    })
}
