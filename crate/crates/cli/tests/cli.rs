use std::path::Path;
use std::process::{Command, Output};

use rbc_core::HalfspaceSystem;
use serde_json::Value;
use tempfile::TempDir;

fn rbc(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rbc"));
    cmd.current_dir(dir).args(args).env_remove("RBC_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const ZERO_PMF: &str = r#"{"variables":[{"name":"U0","size":1},{"name":"U1","size":1},{"name":"U2","size":1},
{"name":"X1","size":1},{"name":"X","size":1},{"name":"Y1","size":1},{"name":"Y2","size":1},{"name":"Yh1","size":1}],
"probs":[1.0]}"#;

#[test]
fn table1_csv_is_within_tolerance_of_the_reference_table() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "cfg.json", r#"{"command":"table1","d":[0.73,0.74,0.75,0.76],"P":5,"P1":1}"#);
    let out = rbc(dir.path(), &["--config", "cfg.json", "--output", "t.csv"], &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let reference = [
        [0.73, 1.6881, 1.7069, 1.2925, 1.6908],
        [0.74, 1.6703, 1.7111, 1.2925, 1.6971],
        [0.75, 1.6529, 1.7153, 1.2925, 1.7033],
        [0.76, 1.6358, 1.7195, 1.2925, 1.7094],
    ];
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("d,liang,scheme1,wu,cf"));
    for (line, want) in lines.zip(reference) {
        let got: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(got[0], want[0]);
        for k in 1..5 {
            assert!(got[k] >= want[k] - 0.01 && got[k] <= want[k] + 0.02, "{line}");
        }
        assert!(line.split(',').skip(1).all(|s| s.split('.').nth(1).unwrap().len() == 4));
    }
}

#[test]
fn every_config_error_is_reported() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "bad.json", r#"{"command":"verify","d":[1.0, 0.5],"P":-2,"scheme":"scheme9","colour":"red"}"#);
    let out = rbc(dir.path(), &["--config", "bad.json"], &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    for needle in ["unknown key `colour`", "d must differ from 0 and 1", "`P` must be nonnegative", "unknown scheme id `scheme9`"] {
        assert!(err.contains(needle), "{needle} missing from {err}");
    }
}

#[test]
fn empty_documents_name_the_required_fields() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "empty.json", "");
    let out = rbc(dir.path(), &["--config", "empty.json"], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("missing required field `command`"));
    let out = rbc(dir.path(), &["project", "--config", "empty.json"], &[]);
    let err = stderr(&out);
    assert!(err.contains("`scheme`") && err.contains("`pmf`"), "{err}");
}

#[test]
fn malformed_documents_and_missing_files_are_errors() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "broken.json", "{\"command\":");
    assert_eq!(rbc(dir.path(), &["--config", "broken.json"], &[]).status.code(), Some(1));
    let out = rbc(dir.path(), &["--config", "nowhere.json"], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("nowhere.json"));
    write(dir.path(), "cfg.json", r#"{"command":"region","region":"theorem1","pmf":"missing_pmf.json"}"#);
    let out = rbc(dir.path(), &["--config", "cfg.json"], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("missing_pmf.json"));
    assert_eq!(rbc(dir.path(), &["--no-such-flag"], &[]).status.code(), Some(1));
}

#[test]
fn region_from_a_constant_pmf_is_the_origin_and_round_trips() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "zero.json", ZERO_PMF);
    write(dir.path(), "cfg.json", r#"{"command":"region","region":"theorem1","pmf":"zero.json"}"#);
    let out = rbc(dir.path(), &["--config", "cfg.json"], &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["vertices"], serde_json::json!([[0.0, 0.0, 0.0]]));
    let sys: HalfspaceSystem = serde_json::from_value(v["system"].clone()).unwrap();
    assert_eq!(serde_json::to_value(&sys).unwrap(), v["system"]);
}

#[test]
fn project_reports_the_projection_and_its_verdict() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "zero.json", ZERO_PMF);
    write(dir.path(), "cfg.json", r#"{"command":"project","scheme":"scheme1","pmf":"zero.json","rfb1":0.5}"#);
    let out = rbc(dir.path(), &["--config", "cfg.json"], &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["verdict"], "equal");
    assert_eq!(v["theorem"], "Theorem1");
    let sys: HalfspaceSystem = serde_json::from_value(v["system"].clone()).unwrap();
    assert_eq!(serde_json::to_value(&sys).unwrap(), v["system"]);
    let csv = rbc(dir.path(), &["--config", "cfg.json", "--format", "csv"], &[]);
    assert_eq!(stdout(&csv), "R0,R1,R2\n0.000000,0.000000,0.000000\n");
}

#[test]
fn verify_scheme1_has_no_unexplained_mismatches() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "cfg.json", r#"{"command":"verify","scheme":"scheme1","trials":100,"seed":1}"#);
    let out = rbc(dir.path(), &["--config", "cfg.json"], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let verdicts = v["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 100);
    let equal = verdicts.iter().filter(|t| t["verdict"] == "equal").count();
    let mismatches = v["mismatches"].as_array().unwrap();
    assert_eq!(equal + mismatches.len(), 100);
    assert!(mismatches.iter().all(|m| m["known_cause"].is_string()));
}

#[test]
fn unexplained_mismatches_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let out = rbc(dir.path(), &["verify", "--config", "/dev/null"], &[]);
    assert_eq!(out.status.code(), Some(1));
    write(dir.path(), "cfg.json", r#"{"command":"verify","scheme":"scheme2b"}"#);
    let out = rbc(dir.path(), &["--config", "cfg.json", "--format", "csv"], &[]);
    assert_eq!(out.status.code(), Some(2));
    let csv = stdout(&out);
    assert!(csv.starts_with("trial,pmf_seed,verdict,feasible\n"));
    assert!(csv.contains("\n95,96,b_not_in_a,"));
}

#[test]
fn flags_override_the_document() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "cfg.json", r#"{"command":"verify","scheme":"scheme2a","trials":50,"seed":3,"format":"csv"}"#);
    let out = rbc(dir.path(), &["--config", "cfg.json", "--trials", "7", "--seed", "11", "--format", "json"], &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["trials"], 7);
    assert_eq!(v["seed"], 11);
    let out = rbc(dir.path(), &["table1", "--config", "cfg.json"], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("conflicts"));
}

#[test]
fn output_is_identical_across_runs_and_thread_counts() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "cfg.json", r#"{"command":"verify","scheme":"scheme2a","trials":40,"seed":5}"#);
    let a = rbc(dir.path(), &["--config", "cfg.json", "--output", "a.json"], &[]);
    let b = rbc(dir.path(), &["--config", "cfg.json", "--output", "b.json"], &[("RBC_THREADS", "1")]);
    assert!(a.status.success() && b.status.success());
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
    write(dir.path(), "corner.json", r#"{"command":"corner","bound":"cf","d":[0.75],"format":"json"}"#);
    let c1 = rbc(dir.path(), &["--config", "corner.json"], &[("RBC_THREADS", "3")]);
    let c2 = rbc(dir.path(), &["--config", "corner.json"], &[]);
    assert_eq!(c1.stdout, c2.stdout);
    let v: Value = serde_json::from_str(&stdout(&c1)).unwrap();
    assert!((v[0]["rate"].as_f64().unwrap() - 1.7031).abs() < 1e-3);
}

#[test]
fn bad_thread_counts_are_rejected() {
    let dir = TempDir::new().unwrap();
    for bad in ["0", "many"] {
        let out = rbc(dir.path(), &["verify"], &[("RBC_THREADS", bad)]);
        assert_eq!(out.status.code(), Some(1));
        assert!(stderr(&out).contains("RBC_THREADS"));
    }
}

#[test]
fn corner_csv_carries_the_argmax() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "cfg.json", r#"{"command":"corner","bound":"wu","d":[0.73,0.76],"rfb1":"inf","rfb2":null}"#);
    let out = rbc(dir.path(), &["--config", "cfg.json"], &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = stdout(&out);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("d,bound,rate,beta,gamma,nhat,active"));
    assert_eq!(lines.next(), Some("0.73,wu,1.2925,0.0000,0.0000,inf,Direct"));
    assert_eq!(lines.count(), 1);
}
