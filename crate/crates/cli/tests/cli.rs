use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pinn_tsampling::net::{init_glorot, read_checkpoint};
use pinn_tsampling::problems::{LinearOdeSpec, PinnLoss, Problem, SamplingMode};
use pinn_tsampling::reference::{error_metrics, Reference};
use pinn_tsampling::Execution;
use serde_json::Value;

fn pinn_ts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pinn-ts")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn comment(csv: &str, key: &str) -> String {
    let prefix = format!("# {key}=");
    let line = csv.lines().find(|l| l.starts_with(&prefix)).unwrap();
    line[prefix.len()..].split_whitespace().next().unwrap().to_owned()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn train_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    stdout(&pinn_ts(&["train", "--rate", "2", "--iters", "30", "--out", out]));
    let s = summary(dir.path());
    assert_eq!(s["iterations"], 30);
    assert_eq!(s["sampling"], "quantile");
    assert_eq!(s["problem"]["kind"], "linear");

    let history = fs::read_to_string(dir.path().join("history.csv")).unwrap();
    let mut lines = history.lines();
    assert_eq!(lines.next(), Some("iteration,loss,final_error,integral_error"));
    let last: Vec<&str> = history.lines().last().unwrap().split(',').collect();
    assert_eq!(last[0], "30");
    assert_eq!(last[2].parse::<f64>().unwrap(), s["final_error"].as_f64().unwrap());

    let (header, params) = read_checkpoint(fs::read(dir.path().join("params.ckpt")).unwrap().as_slice()).unwrap();
    assert_eq!(header.iteration, 30);
    assert_eq!((header.spec.hidden_layers, header.spec.hidden_width), (5, 10));
    assert_eq!(params.len(), header.len);
}

#[test]
fn zero_iterations_reports_the_untrained_network() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&pinn_ts(&["train", "--iters", "0", "--seed", "4", "--out", dir.path().to_str().unwrap()]));
    let s = summary(dir.path());

    let p = Problem::Linear(LinearOdeSpec::default());
    let spec = p.default_mlp();
    let init = init_glorot(&spec, 4);
    let m = error_metrics(&p, &spec, &init, &Reference::for_problem(&p).unwrap(), Execution::Sequential).unwrap();
    let loss = PinnLoss::new(&p, &SamplingMode::quantile(1.0, 0.0, 100).unwrap())
        .unwrap()
        .loss(&spec, &init, Execution::Sequential)
        .unwrap();
    assert_eq!(s["final_error"].as_f64().unwrap(), m.final_error);
    assert_eq!(s["integral_error"].as_f64().unwrap(), m.integral_error);
    assert_eq!(s["final_loss"].as_f64().unwrap(), loss);
}

#[test]
fn lorenz_defaults_to_weighted_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    stdout(&pinn_ts(&["train", "--problem", "lorenz", "--iters", "2", "--width", "4", "--out", out]));
    let s = summary(dir.path());
    assert_eq!(s["sampling"], "weighted");
    assert_eq!(s["hidden_width"], 4);
    assert_eq!(s["hidden_layers"], 5);
}

#[test]
fn diverged_training_exits_3_and_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = pinn_ts(&["train", "--lambda", "1e300", "--iters", "5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(dir.path().join("history.csv").exists());
    assert!(dir.path().join("params.ckpt").exists());
    assert!(!dir.path().join("summary.json").exists());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(pinn_ts(&["train"]).status.code(), Some(2));
    assert_eq!(pinn_ts(&["sweep", "--rates", "3:1:1"]).status.code(), Some(2));
    assert_eq!(pinn_ts(&["sweep", "--rates", "1:2"]).status.code(), Some(2));
    assert_eq!(pinn_ts(&["sweep", "--problem", "heat"]).status.code(), Some(2));
    assert_eq!(pinn_ts(&["theory", "--budget", "-1"]).status.code(), Some(2));
    assert_eq!(pinn_ts(&["reference", "--problem", "burgers", "--nx", "10"]).status.code(), Some(2));
    assert_eq!(pinn_ts(&["--help"]).status.code(), Some(0));
}

#[test]
fn sweep_is_sorted_deterministic_and_footed() {
    let args = ["sweep", "--rates=-2:2:1", "--iters", "40"];
    let first = stdout(&pinn_ts(&args));
    let second = stdout(&pinn_ts(&args));
    assert_eq!(first, second);

    let rows = data_rows(&first);
    let rates: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(rates, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    let best = rows
        .iter()
        .min_by(|a, b| a[1].parse::<f64>().unwrap().total_cmp(&b[1].parse::<f64>().unwrap()))
        .unwrap();
    assert_eq!(comment(&first, "argmin_r"), best[0]);

    let fingerprint = init_glorot(&Problem::Linear(LinearOdeSpec::default()).default_mlp(), 0).fingerprint();
    assert_eq!(comment(&first, "init_fingerprint"), format!("{fingerprint:016x}"));
}

#[test]
fn sweep_point_matches_single_training_run() {
    let sweep = stdout(&pinn_ts(&["sweep", "--rates=0:1:1", "--iters", "25", "--lambda", "-1"]));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    stdout(&pinn_ts(&["train", "--rate", "1", "--iters", "25", "--lambda", "-1", "--out", out]));
    let s = summary(dir.path());
    let row = &data_rows(&sweep)[1];
    assert_eq!(row[1].parse::<f64>().unwrap(), s["final_error"].as_f64().unwrap());
    assert_eq!(row[3].parse::<f64>().unwrap(), s["final_loss"].as_f64().unwrap());
}

#[test]
fn sweep_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = pinn_ts(&["sweep", "--rates=0:0:1", "--iters", "3", "--out", path.to_str().unwrap()]);
    assert!(stdout(&out).is_empty());
    let csv = fs::read_to_string(path).unwrap();
    assert!(csv.starts_with("r,final_error,integral_error,final_loss,iterations,seed\n0,"));
}

#[test]
fn theory_header_and_scan() {
    let csv = stdout(&pinn_ts(&["theory", "--lambda", "2", "--T", "1", "--budget", "100"]));
    let bound: f64 = comment(&csv, "error_bound").parse().unwrap();
    assert!((bound - 0.30329).abs() < 1e-5);
    let oracle: f64 = comment(&csv, "oracle_min_error").parse().unwrap();
    assert!((oracle - bound).abs() < 1e-3 * bound);
    let argmin: f64 = comment(&csv, "argmin_r").parse().unwrap();
    assert!((argmin - 8.0 / 3.0).abs() <= 0.05);
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 241);
    assert_eq!(rows[1][0], "-5.95");

    let flat = stdout(&pinn_ts(&["theory", "--lambda", "0"]));
    assert_eq!(comment(&flat, "argmin_r").parse::<f64>().unwrap(), 0.0);
}

#[test]
fn theory_errors_scale_with_budget() {
    let a = stdout(&pinn_ts(&["theory", "--rates=-2:2:1", "--budget", "50"]));
    let b = stdout(&pinn_ts(&["theory", "--rates=-2:2:1", "--budget", "100"]));
    for (x, y) in data_rows(&a).iter().zip(data_rows(&b)) {
        let (ex, ey): (f64, f64) = (x[1].parse().unwrap(), y[1].parse().unwrap());
        assert!((ey - ex / 2f64.sqrt()).abs() < 1e-12 * ex);
    }
}

#[test]
fn reference_linear_is_closed_form() {
    let csv = stdout(&pinn_ts(&["reference", "--problem", "linear", "--lambda", "2"]));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 256);
    for row in rows {
        let (t, u): (f64, f64) = (row[0].parse().unwrap(), row[1].parse().unwrap());
        assert!((u - 15f64.sqrt() * (2.0 * t).exp()).abs() < 1e-12 * u);
    }
}

#[test]
fn reference_burgers_has_zero_centre_column() {
    let csv = stdout(&pinn_ts(&["reference", "--problem", "burgers", "--nx", "257"]));
    assert!(csv.starts_with("t,x,u\n"));
    let centre: Vec<f64> = data_rows(&csv)
        .iter()
        .filter(|r| r[1] == "0")
        .map(|r| r[2].parse().unwrap())
        .collect();
    assert_eq!(centre.len(), 256);
    assert!(centre.iter().all(|u| *u == 0.0));
}

#[test]
fn reference_lorenz_self_converges() {
    let end = |h: &str| -> Vec<f64> {
        let csv = stdout(&pinn_ts(&["reference", "--problem", "lorenz", "--h", h]));
        let last = data_rows(&csv).pop().unwrap();
        assert_eq!(last[0], "1");
        last[1..].iter().map(|v| v.parse().unwrap()).collect()
    };
    let (coarse, fine) = (end("1e-3"), end("5e-4"));
    for k in 0..3 {
        assert!((coarse[k] - fine[k]).abs() < 1e-8);
    }
}

#[test]
fn reference_lorenz_blowup_exits_3() {
    let out = pinn_ts(&["reference", "--problem", "lorenz", "--h", "0.5", "--T", "100"]);
    assert_eq!(out.status.code(), Some(3));
}
