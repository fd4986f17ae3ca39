//! `bench`: optimizer runs with per-run trajectory CSVs, a summary and a
//! long-format plot file.
//!
//! Output files in `out`:
//!
//! * `traj_<optimizer>_r<repeat>.csv`:
//!   `n,f_gap,lyapunov_E,grad_norm,curvature_est,deriv_diff,elapsed_s`
//! * `summary.csv`: one row per run, see [`SUMMARY_HEADER`]
//! * `plotdata.csv`: `run_id,series,x,y`
//!
//! Missing values are empty fields. Reals use Rust's shortest round-trip
//! exponent format, so files are byte-identical across runs except for the
//! `elapsed_s*` columns.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::info;
use quasar_core::{
    run, BacktrackState, Method, RunConfig, RunStatus, StepRule, TrajectoryRecord64,
};
use rayon::prelude::*;

use crate::config::Settings;
use crate::error::{io_err, usage, CliError, Result};
use crate::registry::{build, BuiltFunction, FunctionSpec};

pub const TRAJECTORY_HEADER: &str = "n,f_gap,lyapunov_E,grad_norm,curvature_est,deriv_diff,elapsed_s";
pub const SUMMARY_HEADER: &str = "run_id,optimizer,repeat,seed,status,steps,gamma,mu,final_gap,iters_to_eps,elapsed_s_to_eps,l_min,l_mean,l_max,neg_curv_steps,neg_curv_episodes";
pub const PLOT_HEADER: &str = "run_id,series,x,y";
pub const NOT_REACHED: &str = "not reached";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LMode {
    /// `s = 1/L`.
    Fixed(f64),
    /// Backtracking from the given initial estimate.
    Backtracking(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub function: FunctionSpec,
    pub optimizers: Vec<Method>,
    /// `None`: the function's declared value.
    pub gamma: Option<f64>,
    pub mu: Option<f64>,
    /// `None`: fixed at the declared `L` when there is one, else backtracking.
    pub l_mode: Option<LMode>,
    pub budget: usize,
    pub eps: f64,
    pub out_dir: PathBuf,
    pub repeats: usize,
    pub x0_norm: f64,
}

impl ExperimentConfig {
    pub fn new(function: FunctionSpec, optimizers: Vec<Method>, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            function,
            optimizers,
            gamma: None,
            mu: None,
            l_mode: None,
            budget: 1000,
            eps: 1e-6,
            out_dir: out_dir.into(),
            repeats: 1,
            x0_norm: 1.0,
        }
    }

    pub fn from_settings(s: &Settings) -> Result<Self> {
        let function = FunctionSpec::from_settings(s)?;
        let names = s.list("optimizer");
        let optimizers = if names.is_empty() {
            vec![Method::Gd, Method::Nag3]
        } else {
            names
                .iter()
                .map(|n| n.parse::<Method>().map_err(|e| CliError::Usage(e.to_string())))
                .collect::<Result<Vec<_>>>()?
        };
        let Some(out) = s.get("out") else {
            return usage("missing `out`");
        };
        let mut cfg = ExperimentConfig::new(function, optimizers, out);
        cfg.gamma = s.number_or_declared("gamma")?;
        cfg.mu = s.number_or_declared("mu")?;
        cfg.l_mode = match s.get("L") {
            None => None,
            Some("auto") => Some(LMode::Backtracking(1.0)),
            Some(_) => Some(LMode::Fixed(s.parsed("L")?.unwrap_or(1.0))),
        };
        cfg.budget = s.parsed_or("steps", cfg.budget)?;
        cfg.eps = s.parsed_or("eps", cfg.eps)?;
        cfg.repeats = s.parsed_or("repeats", cfg.repeats)?;
        cfg.x0_norm = s.parsed_or("x0_norm", cfg.x0_norm)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return usage("steps must be at least 1");
        }
        if !(self.eps > 0.0) {
            return usage("eps must be positive");
        }
        if self.repeats == 0 {
            return usage("repeats must be at least 1");
        }
        if self.optimizers.is_empty() {
            return usage("no optimizer given");
        }
        if !(self.x0_norm > 0.0) {
            return usage("x0_norm must be positive");
        }
        if let Some(LMode::Fixed(l) | LMode::Backtracking(l)) = self.l_mode {
            if !(l > 0.0) {
                return usage("L must be positive");
            }
        }
        self.function.validate()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub run_id: String,
    pub optimizer: Method,
    pub repeat: usize,
    pub seed: u64,
    pub gamma: f64,
    pub mu: f64,
    pub record: TrajectoryRecord64,
}

#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub runs: Vec<RunOutcome>,
    pub files: Vec<PathBuf>,
}

pub fn run_id(opt: Method, repeat: usize) -> String {
    format!("{opt}_r{repeat}")
}

fn resolve_constants(cfg: &ExperimentConfig, f: &BuiltFunction) -> Result<(f64, f64)> {
    let gamma = cfg.gamma.or(f.declared.map(|d| d.0));
    let mu = cfg.mu.or(f.declared.map(|d| d.1));
    match (gamma, mu) {
        (Some(g), Some(m)) => Ok((g, m)),
        _ => usage(format!(
            "{} declares no (gamma, mu); pass --gamma and --mu",
            f.spec.id
        )),
    }
}

fn step_rule(cfg: &ExperimentConfig, f: &BuiltFunction) -> Result<StepRule<f64>> {
    let mode = cfg.l_mode.unwrap_or(match f.smoothness {
        Some(l) => LMode::Fixed(l),
        None => LMode::Backtracking(1.0),
    });
    Ok(match mode {
        LMode::Fixed(l) => StepRule::Fixed(1.0 / l),
        LMode::Backtracking(l0) => StepRule::Backtracking(BacktrackState::new(l0)?),
    })
}

/// Runs every `(optimizer, repeat)` pair (in parallel) and returns the
/// records in `(optimizer, repeat)` order. Repeat `r` uses function seed
/// `seed + r`. Nothing is written.
pub fn run_all(cfg: &ExperimentConfig) -> Result<Vec<RunOutcome>> {
    cfg.validate()?;
    let functions = (0..cfg.repeats)
        .map(|r| build(&cfg.function.with_seed(cfg.function.seed.wrapping_add(r as u64))))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(Method, usize)> = cfg
        .optimizers
        .iter()
        .flat_map(|&m| (0..cfg.repeats).map(move |r| (m, r)))
        .collect();
    jobs.par_iter()
        .map(|&(method, repeat)| {
            let f = &functions[repeat];
            let (gamma, mu) = resolve_constants(cfg, f)?;
            let rc = RunConfig::new(method, gamma, mu, step_rule(cfg, f)?, cfg.budget);
            let x0 = f.start_point(cfg.x0_norm);
            let record = run(&f.problem, &x0, &rc)?;
            info!(
                "{} repeat {repeat}: {} after {} steps",
                method,
                record.status.label(),
                record.rows.len() - 1
            );
            Ok(RunOutcome {
                run_id: run_id(method, repeat),
                optimizer: method,
                repeat,
                seed: f.spec.seed,
                gamma,
                mu,
                record,
            })
        })
        .collect()
}

/// Runs the experiment and writes every CSV under `cfg.out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let runs = run_all(cfg)?;
    let out = &cfg.out_dir;
    std::fs::create_dir_all(out).map_err(io_err(out))?;
    let mut files = Vec::new();
    for r in &runs {
        let path = out.join(format!("traj_{}.csv", r.run_id));
        write_file(&path, &trajectory_csv(&r.record))?;
        files.push(path);
    }
    let path = out.join("summary.csv");
    write_file(&path, &summary_csv(&runs, cfg.eps))?;
    files.push(path);
    let path = out.join("plotdata.csv");
    let refs: Vec<(&str, &TrajectoryRecord64)> =
        runs.iter().map(|r| (r.run_id.as_str(), &r.record)).collect();
    write_file(&path, &emit_plotdata(&refs)?)?;
    files.push(path);
    Ok(ExperimentSummary { runs, files })
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(io_err(path))
}

fn opt(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

pub fn real(v: f64) -> String {
    format!("{v:e}")
}

pub fn trajectory_csv(rec: &TrajectoryRecord64) -> String {
    let mut s = String::with_capacity(64 * rec.rows.len());
    s.push_str(TRAJECTORY_HEADER);
    s.push('\n');
    for r in &rec.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{:.9}",
            r.n,
            opt(r.f_gap),
            opt(r.lyapunov_e),
            real(r.grad_norm),
            opt(r.curvature_est),
            opt(r.deriv_diff),
            r.elapsed_s
        );
    }
    s
}

/// Maximal runs of consecutive rows with negative curvature estimate.
pub fn negative_curvature_episodes(rec: &TrajectoryRecord64) -> usize {
    let mut episodes = 0;
    let mut inside = false;
    for r in &rec.rows {
        let neg = r.curvature_est.is_some_and(|c| c < 0.0);
        if neg && !inside {
            episodes += 1;
        }
        inside = neg;
    }
    episodes
}

pub fn summary_csv(runs: &[RunOutcome], eps: f64) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for r in runs {
        let rec = &r.record;
        let ls = rec.step_ls();
        let (lmin, lmean, lmax) = if ls.is_empty() {
            (String::new(), String::new(), String::new())
        } else {
            let min = ls.iter().copied().fold(f64::INFINITY, f64::min);
            let max = ls.iter().copied().fold(0.0, f64::max);
            let mean = ls.iter().sum::<f64>() / ls.len() as f64;
            (real(min), real(mean), real(max))
        };
        let iters = rec
            .iterations_to(eps)
            .map(|n| n.to_string())
            .unwrap_or_else(|| NOT_REACHED.into());
        let secs = rec
            .seconds_to(eps)
            .map(|t| format!("{t:.9}"))
            .unwrap_or_else(|| NOT_REACHED.into());
        let status = match &rec.status {
            RunStatus::Diverged { iteration, .. } | RunStatus::Failed { iteration, .. } => {
                format!("{}@{iteration}", rec.status.label())
            }
            st => st.label().to_string(),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.run_id,
            r.optimizer,
            r.repeat,
            r.seed,
            status,
            rec.rows.len() - 1,
            real(r.gamma),
            real(r.mu),
            opt(rec.rows.last().and_then(|row| row.f_gap)),
            iters,
            secs,
            lmin,
            lmean,
            lmax,
            rec.negative_curvature_count(),
            negative_curvature_episodes(rec)
        );
    }
    s
}

/// Long-format plot data, ordered by run id, then `x = n`, then series.
pub fn emit_plotdata(records: &[(&str, &TrajectoryRecord64)]) -> Result<String> {
    if records.is_empty() {
        return usage("no records to emit");
    }
    let mut sorted: Vec<_> = records.to_vec();
    sorted.sort_by(|a, b| a.0.cmp(b.0));
    let mut s = String::from(PLOT_HEADER);
    s.push('\n');
    for (id, rec) in sorted {
        for r in &rec.rows {
            let series: [(&str, Option<f64>); 6] = [
                ("f_gap", r.f_gap),
                ("lyapunov_E", r.lyapunov_e),
                ("grad_norm", Some(r.grad_norm)),
                ("curvature_est", r.curvature_est),
                ("deriv_diff", r.deriv_diff),
                ("step_L", r.step_l),
            ];
            for (name, v) in series {
                if let Some(v) = v {
                    let _ = writeln!(s, "{id},{name},{},{}", r.n, real(v));
                }
            }
        }
    }
    Ok(s)
}
