use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> PathBuf {
    root().join("fixtures").join(name)
}

fn choquet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_choquet")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn assert_valid(schema: &str, doc: &Value) {
    let text = fs::read_to_string(root().join("schemas").join(schema)).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema}: {errors:?}");
}

fn write_temp(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn eval_uniform_fixture() {
    let o = choquet(&["eval", "--config", fixture("eval_uniform4.json").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_valid("eval.schema.json", &v);
    assert_eq!(v["VaR_left"], 2.0);
    assert_eq!(v["VaR_right"], 3.0);
    assert_eq!(v["ES_quantile_integral"], 3.5);
    assert_eq!(v["ES_scaled_capacity"], 3.5);
    assert_eq!(v["submodular"], true);
    assert!((v["ES_dual"].as_f64().unwrap() - 3.5).abs() < 1e-8);
}

#[test]
fn eval_sup_probability_and_constant() {
    let o = choquet(&["eval", "--config", fixture("eval_sup_probability.json").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["VaR_left"], 2.0);

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_temp(
        dir.path(),
        "c.json",
        r#"{"capacity": {"kind": "explicit", "m": 2, "table": [0, 0.7, 0.2, 1]}, "x": [4, 4], "alpha": 0.3}"#,
    );
    let v = json(&choquet(&["eval", "--config", cfg.to_str().unwrap()]));
    assert_valid("eval.schema.json", &v);
    for k in ["VaR_left", "VaR_right", "ES_quantile_integral", "ES_scaled_capacity"] {
        assert_eq!(v[k], 4.0, "{k}");
    }
}

#[test]
fn eval_refuses_dual_when_not_coherent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_temp(
        dir.path(),
        "c.json",
        r#"{"capacity": {"kind": "binary_nullset", "m": 2, "null_events": [[0], [1]]}, "x": [1, 2], "alpha": 0.5}"#,
    );
    let o = choquet(&["eval", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["submodular"], false);
    assert!(v["ES_dual"].is_null());
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_temp(dir.path(), "bad.json", r#"{"capacity": {"kind": "probability", "p": [0.9, 0.9]}, "x": [1, 2], "alpha": 0.5}"#);
    assert_eq!(code(&choquet(&["eval", "--config", bad.to_str().unwrap()])), 2);
    let unknown = write_temp(dir.path(), "u.json", r#"{"capacity": {"kind": "nope"}, "x": [1], "alpha": 0.5}"#);
    assert_eq!(code(&choquet(&["eval", "--config", unknown.to_str().unwrap()])), 2);
    assert_eq!(code(&choquet(&["eval", "--config", "/does/not/exist.json"])), 2);
    assert_eq!(code(&choquet(&["share", "--mode", "sideways", "--config", "x"])), 2);
    let o = choquet(&["eval", "--config", bad.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn share_uniform_fixture_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = choquet(&[
        "share",
        "--config",
        fixture("share_uniform4.json").to_str().unwrap(),
        "--oracle",
        "--paired",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_valid("share.schema.json", &v);
    assert_eq!(v["value"], 2.0);
    assert_eq!(v["initial"], 3.0);
    assert!((v["reduction"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(v["oracle"]["agrees"], true);
    assert_eq!(v["paired"]["discrete_ge_atomless"], true);
    assert_eq!(fs::read_to_string(out.join("share.json")).unwrap().as_bytes(), o.stdout.as_slice());
    let csv = fs::read_to_string(out.join("allocation.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "atom,x,agent,fraction");
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn share_negative_infinity_exits_four() {
    let o = choquet(&["share", "--config", fixture("share_unbounded.json").to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    let v = json(&o);
    assert_valid("share.schema.json", &v);
    assert_eq!(v["negative_infinity"], true);
    assert!(v["value"].is_null());
}

#[test]
fn splitting_beats_whole_atoms() {
    let cfg = fixture("share_split.json");
    let o = choquet(&["share", "--config", cfg.to_str().unwrap(), "--mode", "atomless", "--paired", "--oracle"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_valid("share.schema.json", &v);
    assert_eq!(v["mode"], "atomless");
    assert_eq!(v["paired"]["discrete"], 1.0);
    assert_eq!(v["paired"]["atomless"], 0.0);
}

#[test]
fn share_flags_keep_the_value() {
    let cfg = fixture("share_uniform4.json");
    let cfg = cfg.to_str().unwrap();
    let base = json(&choquet(&["share", "--config", cfg]));
    for extra in [
        vec!["--y-shift", "-1.5"],
        vec!["--linear-scan"],
        vec!["--tail-rearrange"],
        vec!["--mode", "atomless", "--tail-rearrange"],
    ] {
        let mut args = vec!["share", "--config", cfg];
        args.extend(extra.iter().copied());
        let o = choquet(&args);
        assert_eq!(code(&o), 0, "{extra:?}: {}", String::from_utf8_lossy(&o.stderr));
        let v = json(&o);
        assert_valid("share.schema.json", &v);
        assert_eq!(v["value"], base["value"], "{extra:?}");
    }
    let too_high = choquet(&["share", "--config", cfg, "--y-shift", "5"]);
    assert_eq!(code(&too_high), 2);
}

#[test]
fn outputs_are_byte_identical() {
    let cfg = fixture("share_uniform4.json");
    let a = choquet(&["share", "--config", cfg.to_str().unwrap(), "--mode", "atomless"]);
    let b = choquet(&["share", "--config", cfg.to_str().unwrap(), "--mode", "atomless"]);
    assert_eq!(a.stdout, b.stdout);
    let a = choquet(&["oracle", "--seed", "9", "--cases", "20"]);
    let b = choquet(&["oracle", "--seed", "9", "--cases", "20"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn oracle_passes_and_catches_a_perturbation() {
    let o = choquet(&["oracle", "--cases", "60"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_valid("oracle.schema.json", &v);
    assert_eq!(v["passed"], true);

    let o = choquet(&["oracle", "--cases", "60", "--perturb"]);
    assert_eq!(code(&o), 3);
    let v = json(&o);
    assert_valid("oracle.schema.json", &v);
    let failures = v["failures"].as_array().unwrap();
    assert!(!failures.is_empty());
    assert!(failures.iter().all(|f| f["identity"] == "infconv_equals_brute_force"));
}

#[test]
fn pipeline_on_the_shipped_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p");
    let o = choquet(&[
        "pipeline",
        "--config",
        fixture("pipeline.json").to_str().unwrap(),
        "--input",
        fixture("grw_10y.csv").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("pipeline.json")).unwrap()).unwrap();
    assert_valid("pipeline.schema.json", &report);
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        let red = r["reduction"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&red));
    }
    let posts: Vec<f64> = rows.iter().map(|r| r["post"].as_f64().unwrap()).collect();
    assert!(posts.windows(2).all(|w| w[1] <= w[0]), "{posts:?}");
    let table = fs::read_to_string(out.join("pipeline.txt")).unwrap();
    assert!(String::from_utf8_lossy(&o.stdout).starts_with(&table));
    for k in 1..=3 {
        assert!(out.join(format!("allocation_row{k}.csv")).exists());
    }
}
