//! Runs the `quasar` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

fn quasar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasar")).args(args).output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Rows of a CSV file as `header name -> cell` maps.
fn rows(path: &Path) -> Vec<std::collections::HashMap<String, String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect())
        .collect()
}

fn drop_elapsed(text: &str) -> String {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let keep: Vec<bool> = header.iter().map(|h| !h.starts_with("elapsed_s")).collect();
    std::iter::once(header.join(","))
        .chain(lines.map(str::to_owned))
        .map(|l| {
            l.split(',')
                .zip(&keep)
                .filter(|(_, k)| **k)
                .map(|(c, _)| c)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}

#[test]
fn golden_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&quasar(&[
        "bench", "--function", "quadratic", "--dim", "4", "--cond", "0.1", "--seed", "9",
        "--optimizer", "gd,nag3,nag2", "--steps", "30", "--eps", "1e-4", "--out", out,
    ]));
    let got = drop_elapsed(&std::fs::read_to_string(dir.path().join("summary.csv")).unwrap());
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/summary_quadratic.csv");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden, &got).unwrap();
    }
    assert_eq!(got, std::fs::read_to_string(golden).unwrap());
}

#[test]
fn acceleration_pays_off_on_ill_conditioned_quadratics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&quasar(&[
        "bench", "--function", "quadratic", "--dim", "10", "--cond", "1e-4", "--optimizer",
        "gd,nag3", "--steps", "20000", "--eps", "1e-6", "--out", out,
    ]));
    let summary = rows(&dir.path().join("summary.csv"));
    let iters = |id: &str| -> f64 {
        let r = summary.iter().find(|r| r["run_id"] == id).unwrap();
        r["iters_to_eps"].parse().unwrap_or(f64::INFINITY)
    };
    let (gd, nag) = (iters("gd_r0"), iters("nag3_r0"));
    assert!(nag.is_finite() && gd > 10.0 * nag, "gd {gd} nag3 {nag}");
}

#[test]
fn plotted_gap_decays_at_the_accelerated_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cond = 1e-2;
    ok(&quasar(&[
        "bench", "--function", "quadratic", "--dim", "8", "--cond", "0.01", "--optimizer", "nag3",
        "--steps", "200", "--out", out,
    ]));
    let gaps: Vec<(f64, f64)> = rows(&dir.path().join("plotdata.csv"))
        .into_iter()
        .filter(|r| r["series"] == "f_gap")
        .map(|r| (r["x"].parse().unwrap(), r["y"].parse().unwrap()))
        .collect();
    let (n0, g0) = gaps[0];
    let (n1, g1) = gaps.iter().copied().filter(|(_, g)| *g > 1e-25).last().unwrap();
    let slope = ((g1 / 2.0).ln() - g0.ln()) / (n1 - n0);
    assert!(slope <= (1.0 - f64::sqrt(cond)).ln(), "slope {slope}");
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["bench", "--function", "nope", "--out", "x"],
        vec!["bench", "--function", "quadratic"],
        vec!["check", "--function", "lasso"],
        vec!["dump", "--function", "quadratic", "--bounds", "1,0"],
        vec!["ode", "--function", "experiment", "--dim", "3"],
    ] {
        let out = quasar(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(quasar(&["bench", "--frobnicate"]).status.code(), Some(2));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    std::fs::write(&cfg, "# small run\nfunction=quadratic\ndim=3\nsteps=5\noptimizer=gd\n").unwrap();
    let out = dir.path().join("o");
    ok(&quasar(&[
        "bench", "--config", cfg.to_str().unwrap(), "--steps", "7", "--out", out.to_str().unwrap(),
    ]));
    let summary = rows(&out.join("summary.csv"));
    assert_eq!(summary.len(), 1);
    assert_eq!(summary[0]["steps"], "7");
    let traj = std::fs::read_to_string(out.join("traj_gd_r0.csv")).unwrap();
    assert_eq!(traj.lines().count(), 9);
}

#[test]
fn check_ode_and_dump_run() {
    let text = ok(&quasar(&["check", "--function", "experiment", "--dim", "10", "--samples", "300"]));
    assert!(text.contains("sqc (1, 2)") && text.contains("consistent"));
    let text = ok(&quasar(&["ode", "--function", "quadratic", "--dim", "3", "--cond", "0.2"]));
    assert!(text.contains("K_observed") && text.contains("ok"));
    let text = ok(&quasar(&[
        "dump", "--function", "figure1", "--segment", "1,0;-1,0.5", "--resolution", "5",
    ]));
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("t,value\n"));
}
