use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quasar_bench::bench::run_experiment;
use quasar_bench::check::run_check;
use quasar_bench::dump::{grid_dump, DumpMode};
use quasar_bench::ode::run_ode;
use quasar_bench::registry::{build, FunctionSpec};
use quasar_bench::{CliError, ExperimentConfig, Result, Settings};

#[derive(Parser)]
#[command(name = "quasar", version, about = "Quasar-convex optimization benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run optimizers and write traj_*.csv, summary.csv and plotdata.csv.
    Bench(Common),
    /// Estimate geometry constants and check the declared SQC pair.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        samples: Option<String>,
        #[arg(long)]
        radius: Option<String>,
        /// `ball` or `rays`.
        #[arg(long)]
        plan: Option<String>,
    },
    /// Integrate the accelerated ODE and check its rate.
    Ode {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        horizon: Option<String>,
        #[arg(long)]
        dt: Option<String>,
    },
    /// Print function values on a 2-D grid or along a segment.
    Dump {
        #[command(flatten)]
        common: Common,
        /// `lo,hi` or `lo1,hi1,lo2,hi2`.
        #[arg(long, allow_hyphen_values = true)]
        bounds: Option<String>,
        /// `p1,..,pd;q1,..,qd`.
        #[arg(long, allow_hyphen_values = true)]
        segment: Option<String>,
        #[arg(long)]
        resolution: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// `key=value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    cond: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    /// Comma-separated list.
    #[arg(long)]
    optimizer: Option<String>,
    /// A number or `declared`.
    #[arg(long)]
    gamma: Option<String>,
    /// A number or `declared`.
    #[arg(long)]
    mu: Option<String>,
    /// A number or `auto` (backtracking).
    #[arg(long = "L")]
    l: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    repeats: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    x0_norm: Option<String>,
}

impl Common {
    fn settings(&self, extra: &[(&str, &Option<String>)]) -> Result<Settings> {
        let mut s = match &self.config {
            Some(p) => Settings::load(p)?,
            None => Settings::new(),
        };
        let flags = [
            ("function", &self.function),
            ("seed", &self.seed),
            ("dim", &self.dim),
            ("cond", &self.cond),
            ("lambda", &self.lambda),
            ("optimizer", &self.optimizer),
            ("gamma", &self.gamma),
            ("mu", &self.mu),
            ("L", &self.l),
            ("steps", &self.steps),
            ("eps", &self.eps),
            ("repeats", &self.repeats),
            ("out", &self.out),
            ("x0_norm", &self.x0_norm),
        ];
        for (k, v) in flags.iter().chain(extra) {
            if let Some(v) = v {
                s.set(k, v.as_str())?;
            }
        }
        Ok(s)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bench(c) => {
            let cfg = ExperimentConfig::from_settings(&c.settings(&[])?)?;
            let summary = run_experiment(&cfg)?;
            for f in &summary.files {
                println!("{}", f.display());
            }
        }
        Command::Check {
            common,
            samples,
            radius,
            plan,
        } => {
            let s = common.settings(&[("samples", &samples), ("radius", &radius), ("plan", &plan)])?;
            print!("{}", run_check(&s)?.report);
        }
        Command::Ode { common, horizon, dt } => {
            let s = common.settings(&[("horizon", &horizon), ("dt", &dt)])?;
            let out = run_ode(&s)?;
            print!("{}", out.report);
            if let Some(p) = out.csv_file {
                println!("{}", p.display());
            }
        }
        Command::Dump {
            common,
            bounds,
            segment,
            resolution,
        } => {
            let s = common.settings(&[
                ("bounds", &bounds),
                ("segment", &segment),
                ("resolution", &resolution),
            ])?;
            let f = build(&FunctionSpec::from_settings(&s)?)?;
            let mode = DumpMode::from_settings(&s)?;
            let text = grid_dump(f.oracle(), &mode, s.parsed_or("resolution", 101usize)?)?;
            match s.get("out") {
                Some(p) => std::fs::write(p, text)
                    .map_err(|e| CliError::Io { path: p.into(), source: e })?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
