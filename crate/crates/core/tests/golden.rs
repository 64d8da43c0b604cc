//! Pins output schemas. Set FLOWNET_BLESS=1 to rewrite the golden files.

use std::path::{Path, PathBuf};
use std::process::Command;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).to_path_buf()
}

fn check(name: &str, actual: &str) {
    let file = root().join("tests/golden").join(name);
    if std::env::var_os("FLOWNET_BLESS").is_some() {
        std::fs::write(&file, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&file).unwrap_or_else(|e| panic!("{}: {e}", file.display()));
    assert_eq!(actual, expected, "golden mismatch for {name}");
}

fn stdout(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_flownet")).args(args).env_remove("FLOWNET_OUT_DIR").output().unwrap();
    String::from_utf8(out.stdout).unwrap()
}

fn scenario(name: &str) -> String {
    root().join("../../scenarios").join(name).to_str().unwrap().to_owned()
}

#[test]
fn mincut_schema() {
    check("mincut_parallel.json", &stdout(&["mincut", &scenario("parallel.json")]));
    check("mincut_diamond.json", &stdout(&["mincut", &scenario("diamond.json")]));
}

#[test]
fn limitflow_schema() {
    check("limitflow_parallel.csv", &stdout(&["limitflow", &scenario("parallel.json"), "--sweep", "0:2:0.25"]));
}

#[test]
fn validation_schema() {
    check("validate_chain.json", &stdout(&["validate", &scenario("chain.json"), "--samples", "50"]));
}

#[test]
fn simulation_summary_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    stdout(&["simulate", &scenario("chain.json"), "--horizon", "5", "--dt", "0.5", "--out", out]);
    check("simulate_chain_summary.json", &std::fs::read_to_string(dir.path().join("summary.json")).unwrap());
    check("simulate_chain_trajectory.csv", &std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap());
    check("simulate_chain_manifest.json", &std::fs::read_to_string(dir.path().join("manifest.json")).unwrap());
}

#[test]
fn canonical_scenario_form() {
    let doc = flownet::scenario::ScenarioDocument::from_path(Path::new(&scenario("parallel.json"))).unwrap();
    check("parallel_canonical.json", &doc.to_canonical_json());
}
