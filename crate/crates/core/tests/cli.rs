use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_flownet"));
    c.env_remove("FLOWNET_OUT_DIR");
    c
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_known_good_and_bad() {
    let ok = run(&["validate", path(&scenario("parallel.json"))]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["valid"], true);

    let cyc = run(&["validate", path(&scenario("cycle.json"))]);
    assert_eq!(cyc.status.code(), Some(1));
    let v = json(&cyc);
    assert_eq!(v["topology"]["violations"][0]["kind"], "cycle");
    assert_eq!(v["topology"]["violations"][0]["nodes"], serde_json::json!([1, 2]));

    let anti = run(&["validate", path(&scenario("congestion_seeking.json"))]);
    assert_eq!(anti.status.code(), Some(1));
    let v = json(&anti);
    assert_eq!(v["policies"][0]["property_a"], false);
    assert!(v["policies"][0]["property_a_violations"].as_u64().unwrap() > 0);
}

#[test]
fn parse_errors_are_validation_failures() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"nodes\": 2,\n  \"links\": [{\"id\": 1, \"tail\": 0, \"head\": \"x\"}]\n}").unwrap();
    let out = run(&["validate", path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("links[0].head") && err.contains("line 3"), "{err}");

    let missing = run(&["mincut", path(&dir.path().join("nope.json"))]);
    assert_eq!(missing.status.code(), Some(2));

    let flag = run(&["simulate", path(&scenario("parallel.json")), "--horizon", "abc"]);
    assert_eq!(flag.status.code(), Some(1));
}

#[test]
fn simulate_writes_outputs_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = run(&["simulate", path(&scenario("parallel.json")), "--horizon", "100", "--out", path(d)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["trajectory.csv", "summary.json", "manifest.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let summary: Value = serde_json::from_slice(&std::fs::read(a.join("summary.json")).unwrap()).unwrap();
    let f = summary["terminal_flow"].as_array().unwrap();
    assert!((f[0].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-6);
    assert!((f[1].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-6);
    assert_eq!(summary["converged"], true);
    let manifest: Value = serde_json::from_slice(&std::fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["scenario_hash"].as_str().unwrap().len(), 64);
    let csv = std::fs::read_to_string(a.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,rho_1,rho_2,f_1,f_2,lambda_0,lambda_1\n"));
}

#[test]
fn simulate_honours_out_dir_variable() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["simulate", path(&scenario("chain.json")), "--horizon", "20"])
        .env("FLOWNET_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("summary.json").exists());
}

#[test]
fn simulate_zero_inflow_and_cut_attack() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("parallel.json")).unwrap().replace("\"inflow\": 1.0", "\"inflow\": 0.0");
    let zero = dir.path().join("zero.json");
    std::fs::write(&zero, text).unwrap();
    let out = run(&["simulate", path(&zero), "--horizon", "10", "--out", path(&dir.path().join("z"))]);
    assert_eq!(json(&out)["terminal_flow"], serde_json::json!([0.0, 0.0]));

    let out = run(&["simulate", path(&scenario("parallel_cut_attack.json")), "--out", path(&dir.path().join("c"))]);
    let v = json(&out);
    assert!(v["tail_min_outflow"].as_f64().unwrap() < 0.5);
    assert_eq!(v["perturbation"]["magnitude"], 1.25);
}

#[test]
fn mincut_fixtures() {
    let v = json(&run(&["mincut", path(&scenario("parallel.json"))]));
    assert_eq!(v["capacity"], 1.5);
    let v = json(&run(&["mincut", path(&scenario("chain.json"))]));
    assert_eq!(v["capacity"], 1.0);
    assert_eq!(v["cut"]["links"], serde_json::json!([2]));
    // brute-force enumeration oracle computed independently
    let v = json(&run(&["mincut", path(&scenario("random_dag.json"))]));
    assert!((v["capacity"].as_f64().unwrap() - 4.003).abs() < 1e-12);
    assert_eq!(v["cut"]["origin_side"], serde_json::json!([0, 1, 2, 3]));
}

#[test]
fn resilience_reports() {
    let args = |seed: &str| {
        run(&["resilience", path(&scenario("parallel.json")), "--alphas", "0.5", "--samples", "4", "--seed", seed])
    };
    let (a, b) = (args("9"), args("9"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    let d = v["alpha_sweep"][0]["defeating_delta"].as_f64().unwrap();
    assert!(d <= 1.5 - 0.25 + v["bisection_tol"].as_f64().unwrap());
    assert_eq!(v["seed"], 9);

    let anti = run(&["resilience", path(&scenario("congestion_seeking.json"))]);
    assert_eq!(anti.status.code(), Some(1));
}

#[test]
fn limitflow_sweep() {
    let out = run(&["limitflow", path(&scenario("parallel.json")), "--sweep", "0:2:0.1", "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<String>> = text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 21);
    assert_eq!(&rows[0][..3], &["0", "0", "0"]);
    let f1: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    let f2: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    for w in f1.windows(2).chain(f2.windows(2)) {
        assert!(w[1] >= w[0] - 1e-12);
    }
    for r in &rows[15..] {
        assert_eq!(&r[1..5], &["0.75", "0.75", "1", "1"]);
    }
    let bad = run(&["limitflow", path(&scenario("parallel.json")), "--sweep", "2:0:0.1"]);
    assert_eq!(bad.status.code(), Some(1));
}
