//! The `weierlab` binary end to end: files written, exit codes, overrides.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use weierlab::output::schema_errors;

const BIN: &str = env!("CARGO_BIN_EXE_weierlab");

const SYSTEM_B: &str = r#"
[system]
intervals = 3
lambda = { kind = "tau-power", theta = 0.2 }
g = { kind = "cosine" }

[compute]
samples = 5000
graph_points = 20000
scales = [3, 10]
scan_grid = [4, 4, 16]
eval_points = 33
"#;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("weierlab-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn weierlab(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.toml");
    fs::write(&cfg, config).unwrap();
    Command::new(BIN)
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .env_remove("WEIERLAB_SEED")
        .env_remove("WEIERLAB_SAMPLES")
        .output()
        .unwrap()
}

fn json(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out").join(name)).unwrap()).unwrap()
}

#[test]
fn validate_writes_schema_valid_json_and_resolved_config() {
    let dir = scratch("validate");
    let o = weierlab(&dir, SYSTEM_B, &["validate"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir, "validate.json");
    assert!(schema_errors(&v).is_empty());
    assert_eq!(v["result"]["branches"], 3);
    assert!(dir.join("out/weierlab.schema.json").exists());
    let echo = fs::read_to_string(dir.join("out/config.resolved.toml")).unwrap();
    assert!(echo.contains("seed = 42") && echo.contains("partition"));
    // the echo reproduces the run
    let again = scratch("validate-echo");
    let o = weierlab(&again, &echo, &["validate"]);
    assert!(o.status.success());
    assert_eq!(json(&again, "validate.json"), v);
}

#[test]
fn eval_csv_has_header_and_requested_points() {
    let dir = scratch("eval");
    assert!(weierlab(&dir, SYSTEM_B, &["eval"]).status.success());
    let csv = fs::read_to_string(dir.join("out/eval.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,w"));
    assert_eq!(lines.count(), 33);
}

#[test]
fn invalid_system_exits_with_one() {
    let dir = scratch("invalid");
    let bad = SYSTEM_B.replace("theta = 0.2", "theta = 1.5");
    let o = weierlab(&dir, &bad, &["bowen"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error[config]"));
    assert!(!dir.join("out/bowen.json").exists());
}

#[test]
fn unknown_key_exits_with_one_and_names_it() {
    let dir = scratch("unknown");
    let o = weierlab(&dir, &format!("{SYSTEM_B}\nsede = 3\n"), &["bowen"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sede"));
}

#[test]
fn flags_override_config_and_reach_provenance() {
    let dir = scratch("flags");
    let o = weierlab(&dir, SYSTEM_B, &["theta", "--seed", "7", "--samples", "3000"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir, "theta.json");
    assert_eq!(v["provenance"]["seed"], 7);
    assert_eq!(v["result"]["samples"], 3000);
    let csv = fs::read_to_string(dir.join("out/theta.csv")).unwrap();
    assert!(csv.starts_with("xi,x,theta\n"));
}

#[test]
fn scales_flag_is_parsed_and_checked() {
    let dir = scratch("scales");
    let o = weierlab(&dir, SYSTEM_B, &["boxdim", "--scales", "3..9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.join("out/boxdim.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 7);
    let o = weierlab(&dir, SYSTEM_B, &["boxdim", "--scales", "9..3"]);
    assert_eq!(o.status.code(), Some(1));
    let o = weierlab(&dir, SYSTEM_B, &["boxdim", "--scales", "nine"]);
    assert!(!o.status.success());
}

#[test]
fn environment_supplies_seed() {
    let dir = scratch("env");
    let cfg = dir.join("run.toml");
    fs::write(&cfg, SYSTEM_B).unwrap();
    let o = Command::new(BIN)
        .args(["bowen", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .env("WEIERLAB_SEED", "99")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(json(&dir, "bowen.json")["provenance"]["seed"], 99);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let read = |threads: &str| {
        let dir = scratch(&format!("threads-{threads}"));
        let o = weierlab(&dir, SYSTEM_B, &["theta", "--threads", threads]);
        assert!(o.status.success());
        (fs::read(dir.join("out/theta.json")).unwrap(), fs::read(dir.join("out/theta.csv")).unwrap())
    };
    assert_eq!(read("1"), read("2"));
}

#[test]
fn json_only_format_skips_csv() {
    let dir = scratch("formats");
    let o = weierlab(&dir, &format!("{SYSTEM_B}\n[output]\nformats = [\"json\"]\n"), &["eval"]);
    assert!(o.status.success());
    assert!(dir.join("out/eval.json").exists());
    assert!(!dir.join("out/eval.csv").exists());
}

#[test]
fn report_on_uncertified_system_has_no_claim() {
    let dir = scratch("report");
    let a = SYSTEM_B.replace(
        "lambda = { kind = \"tau-power\", theta = 0.2 }",
        "lambda = { kind = \"constant\", values = [0.6, 0.6, 0.6] }",
    );
    let o = weierlab(&dir, &format!("{a}anchors = 50\n"), &["report", "--samples", "20000"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir, "report.json");
    assert!(schema_errors(&v).is_empty(), "{:?}", schema_errors(&v));
    assert_eq!(v["result"]["verdict"]["certified"], false);
    assert!(v["result"]["verdict"]["claimed_dim"].is_null());
    assert!((v["result"]["bowen"]["s_star"]["value"].as_f64().unwrap() - (2.0 + 0.6f64.ln() / 3f64.ln())).abs() < 1e-10);
}
