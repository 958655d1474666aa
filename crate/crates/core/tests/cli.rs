use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn shrinkage(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shrinkage"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

const FIG1A: &str = r#"{
  "experiment": "onebit-vs-linear",
  "p": 100,
  "trials": 3,
  "solver_config": {"max_iters": 40}
}"#;

#[test]
fn experiment_writes_traces_next_to_config_name() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("fig1a.json"), FIG1A).unwrap();
    let out = shrinkage(dir.path(), &["experiment", "--config", "fig1a.json"]);
    let v = json(&out);
    assert_eq!(v["experiment"], "onebit-vs-linear");
    let d = dir.path().join("fig1a");
    for f in ["trial_000_onebit.csv", "trial_002_linear.csv", "mean.csv", "summary.json", "config.json"] {
        assert!(d.join(f).exists(), "{f}");
    }
    let head = fs::read_to_string(d.join("mean.csv")).unwrap();
    assert!(head.starts_with("iter,error,residual,wall_ms\n"));
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), FIG1A).unwrap();
    let run = |seed: &str, out: &str| {
        json(&shrinkage(dir.path(), &["solve", "--config", "c.json", "--seed", seed, "--trials", "2", "--out", out]));
        fs::read(dir.path().join(out).join("mean.csv")).unwrap()
    };
    let a = run("5", "a");
    let b = run("5", "b");
    let c = run("6", "c");
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(dir.path().join("a/trial_001.csv").exists());
    assert!(!dir.path().join("a/trial_002.csv").exists());
}

#[test]
fn stats_and_n0() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&shrinkage(dir.path(), &["stats", "--link", "cubic"]));
    assert_eq!((v["mu"].as_f64(), v["sigma_sq"].as_f64(), v["gamma_sq"].as_f64()), (Some(3.0), Some(6.0), Some(42.0)));
    let v = json(&shrinkage(dir.path(), &["n0", "--reg", "l1", "--p", "500", "--s", "10"]));
    assert!((v["n0"].as_f64().unwrap() - 75.9046).abs() < 1e-3);
    assert!((v["lambda"].as_f64().unwrap() - 1.842).abs() < 1e-3);
    assert_eq!(v["grid"]["points"], 50);
}

#[test]
fn bound_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = shrinkage(
        dir.path(),
        &["bound", "--kind", "pgd", "--n", "2000", "--n0", "20", "--eta", "2", "--sigma", "0.6", "--gamma", "0.6", "--iters", "5", "--out", "b.csv"],
    );
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "iter,bound");
    assert_eq!(lines.len(), 6);
}

#[test]
fn validate_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&shrinkage(
        dir.path(),
        &["validate", "--lemma", "effective-noise", "--p", "50", "--s", "3", "--n", "200", "--trials", "20"],
    ));
    assert_eq!(v["lemma"], "effective-noise");
    assert_eq!(v["trials"], 20);
    assert_eq!(v["pass"].as_bool().unwrap(), v["statistic"].as_f64() <= v["bound"].as_f64());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), "{\"experiment\": \"solve\",\n \"p\": \"many\"}").unwrap();
    let out = shrinkage(dir.path(), &["solve", "--config", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`p`") && err.contains("line 2"), "{err}");
    assert_eq!(shrinkage(dir.path(), &["solve", "--config", "missing.json"]).status.code(), Some(1));
    assert_eq!(shrinkage(dir.path(), &["bound", "--kind", "psgd", "--n", "5", "--n0", "9"]).status.code(), Some(2));
    assert_eq!(shrinkage(dir.path(), &["--help"]).status.code(), Some(0));
}
