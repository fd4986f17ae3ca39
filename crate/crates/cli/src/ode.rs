//! `ode`: RK4 integration of the accelerated ODE with the rate check.
//!
//! Writes `ode.csv` (`t,gap,energy,damping,speed`) when `out` is set.

use std::fmt::Write as _;
use std::path::PathBuf;

use quasar_core::odeflow::{
    default_dt, default_horizon, integrate, verify_rate, IntegrateOptions, OdeParams,
    OdeTrajectory, RateCheck,
};
use quasar_core::oracles::gap;

use crate::bench::real;
use crate::config::Settings;
use crate::error::{io_err, usage, Result};
use crate::registry::{build, FunctionSpec};

pub const ODE_HEADER: &str = "t,gap,energy,damping,speed";

pub struct OdeOutcome {
    pub trajectory: OdeTrajectory<f64>,
    pub rate: RateCheck<f64>,
    pub report: String,
    pub csv_file: Option<PathBuf>,
}

pub fn ode_csv(tr: &OdeTrajectory<f64>) -> String {
    let opt = |v: Option<f64>| v.map(real).unwrap_or_default();
    let mut s = String::from(ODE_HEADER);
    s.push('\n');
    for smp in &tr.samples {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            real(smp.t),
            opt(smp.gap),
            opt(smp.energy),
            opt(smp.damping),
            real(smp.speed)
        );
    }
    s
}

pub fn run_ode(s: &Settings) -> Result<OdeOutcome> {
    let f = build(&FunctionSpec::from_settings(s)?)?;
    let oracle = f.smooth_only("ode")?;
    let gamma = s.number_or_declared("gamma")?.or(f.declared.map(|d| d.0));
    let mu = s.number_or_declared("mu")?.or(f.declared.map(|d| d.1));
    let (Some(gamma), Some(mu)) = (gamma, mu) else {
        return usage(format!("{} declares no (gamma, mu); pass --gamma and --mu", f.spec.id));
    };
    let l = match s.get("L") {
        Some("auto") | None => f.smoothness,
        Some(_) => s.parsed("L")?,
    };
    let Some(l) = l else {
        return usage(format!("{} declares no smoothness; pass --L", f.spec.id));
    };
    if !(l > 0.0) {
        return usage("L must be positive");
    }
    let p = OdeParams::new(gamma, mu, 1.0 / l)?;
    let horizon = s.parsed_or("horizon", default_horizon(gamma, mu))?;
    let dt = s.parsed_or("dt", default_dt(l))?;
    if !(horizon > 0.0 && dt > 0.0) {
        return usage("horizon and dt must be positive");
    }
    let x0 = f.start_point(s.parsed_or("x0_norm", 1.0)?);
    let gap0 = gap(oracle, &x0)?;
    let tr = integrate(oracle, &x0, &p, horizon, dt, IntegrateOptions::default())?;
    let rate = verify_rate(&tr, gamma, mu, gap0)?;

    let mut report = String::new();
    let _ = writeln!(
        report,
        "function {} gamma {gamma} mu {mu} s {:.6e} horizon {horizon:.6} dt {dt:.3e}",
        f.spec.id, p.s
    );
    let _ = writeln!(
        report,
        "K_observed {:.6e} (bound 7): {}",
        rate.k_observed,
        if rate.pass { "ok" } else { "exceeded" }
    );
    if tr.outside_hypotheses {
        let _ = writeln!(report, "note: function is not C2, rate guarantee does not apply");
    }
    let mut csv_file = None;
    if let Some(out) = s.get("out") {
        let dir = PathBuf::from(out);
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let path = dir.join("ode.csv");
        std::fs::write(&path, ode_csv(&tr)).map_err(io_err(&path))?;
        csv_file = Some(path);
    }
    Ok(OdeOutcome {
        trajectory: tr,
        rate,
        report,
        csv_file,
    })
}
