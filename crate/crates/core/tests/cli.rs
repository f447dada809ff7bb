use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn condgrad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_condgrad")).args(args).output().expect("binary runs")
}

fn csv_without_time(path: &Path) -> Vec<String> {
    // elapsed_s is the last column
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect()
}

#[test]
fn run_writes_a_deterministic_trace() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &str| {
        ["run", "--family", "lq-ball", "--n", "40", "--q", "1.5", "--p", "1.5", "--seed", "3", "--out-dir", out]
            .map(String::from)
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = condgrad(&args(out.to_str().unwrap()).iter().map(String::as_str).collect::<Vec<_>>());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let trace = csv_without_time(&a.join("trace.csv"));
    assert_eq!(trace[0], "t,phi,delta,delta_star,tau,L,inner");
    assert!(trace.len() > 2);
    assert_eq!(trace, csv_without_time(&b.join("trace.csv")));
    let instance = fs::read_to_string(a.join("instance.json")).unwrap();
    let spec = condgrad::InstanceSpec::from_json(&instance).unwrap();
    assert_eq!(spec.seed, 3);
}

#[test]
fn run_prints_the_trace_without_an_output_directory() {
    let o = condgrad(&["run", "--family", "entropy", "--m", "10", "--n", "20", "--rule", "nesterov"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("t,phi,delta"));
}

#[test]
fn experiment_writes_traces_and_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.toml");
    fs::write(
        &config,
        r#"
[[experiment]]
name = "small"
family = "entropy"
m = 10
n = 20
p = 2.0
lambda = 1.0
n_seeds = 2
base_seed = 5
rel_gap_tol = 1e-6
rules = [{ kind = "param_dependent" }, { kind = "adaptive", l_init = 10.0 }, { kind = "diminishing" }]
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = condgrad(&["experiment", "--config", config.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for file in ["param_dependent_seed5.csv", "adaptive_l10_seed6.csv", "diminishing_seed5.csv"] {
        assert!(out.join("small").join(file).is_file(), "{file}");
    }
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(json.as_array().map(Vec::len), Some(3));
}

#[test]
fn bad_config_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(
        &config,
        "[[experiment]]\nname = \"x\"\nfamily = \"lq_ball\"\nn = 5\nq = 2.0\np = 2.0\nrules = []\nrel_gap_tol = 1e-6\n",
    )
    .unwrap();
    let o = condgrad(&["experiment", "--config", config.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = condgrad(&["experiment", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bounds_writes_the_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let o = condgrad(&[
        "bounds",
        "--family",
        "entropy",
        "--m",
        "20",
        "--n",
        "40",
        "--lambda",
        "3",
        "--seed",
        "2",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,phi_gap,envelope,delta_star,delta_star_bound,valid"));
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        if cols[5] == "true" {
            let (gap, env): (f64, f64) = (cols[1].parse().unwrap(), cols[2].parse().unwrap());
            assert!(gap <= env * (1.0 + 1e-6), "{line}");
        }
    }
}

#[test]
fn check_reports_diagnostics() {
    let o = condgrad(&["check", "--family", "lq-ball", "--n", "20", "--p", "1.5", "--pairs", "50"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!o.stdout.is_empty());
}
