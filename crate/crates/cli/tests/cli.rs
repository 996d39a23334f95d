use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const EUCLIDEAN: &str = r#"{"dim": 3, "metric": {"family": "euclidean"}}"#;
const SPHERE3: &str = r#"{"dim": 3, "metric": {"family": "riemannian_constant_curvature", "params": {"K": 1.0}}}"#;

fn finslerc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finslerc")).args(args).output().expect("spawn finslerc")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn euclidean_all_checks_clean() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "e.json", EUCLIDEAN);
    let out = finslerc(&["report", "--metric", &m, "--points", "random:seed=1,count=5", "--checks", "all"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    let points = r["points"].as_array().unwrap();
    assert_eq!(points.len(), 5);
    for p in points {
        for (name, v) in p["classes"].as_object().unwrap() {
            let expected = if name == "horizontally_integrable" { "pass" } else { "inapplicable" };
            assert_eq!(v["verdict"], expected, "{name}");
        }
        assert!(p["tensors"]["g"]["components"].is_array());
        assert_eq!(p["tensors"]["h_curvature"]["variance"], "ulll");
    }
    for (_, inv) in r["aggregate"]["invariants"].as_object().unwrap() {
        assert_eq!(inv["ok"], true);
    }
    assert_eq!(r["aggregate"]["engine_bug"], false);
}

#[test]
fn sphere_reports_alpha_two() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "s.json", SPHERE3);
    let out = finslerc(&["report", "--metric", &m, "--points", "random:seed=3,count=10", "--checks", "classify"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    for p in r["points"].as_array().unwrap() {
        let g = &p["classes"]["generalized_ricci"];
        assert_eq!(g["verdict"], "pass");
        assert!((g["alpha"].as_f64().unwrap() - 2.0).abs() < 1e-7);
    }
    assert_eq!(r["aggregate"]["classes"]["ricci_finsler"]["verdict"], "fail");
}

#[test]
fn identical_seed_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "s.json", SPHERE3);
    let a = dir.path().join("a.json").display().to_string();
    let b = dir.path().join("b.json").display().to_string();
    for out in [&a, &b] {
        let o = finslerc(&["report", "--metric", &m, "--points", "random:seed=9,count=4", "--out", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn malformed_dsl_exits_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "bad.json", r#"{"dim": 3, "metric": {"dsl": "sqrt(y1^2 + * y2^2 + y3^2)"}}"#);
    let out = finslerc(&["report", "--metric", &m, "--points", "random:seed=1,count=2"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("1:13"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "e.json", EUCLIDEAN);
    let missing = dir.path().join("none.json").display().to_string();
    let zero = write(dir.path(), "zero.json", r#"[{"x": [0, 0, 0], "y": [0, 0, 0]}]"#);
    let cases: Vec<Vec<&str>> = vec![
        vec!["--metric", &missing, "--points", "random:seed=1,count=2"],
        vec!["--metric", &m, "--points", "random:seed=1"],
        vec!["--metric", &m, "--points", "random:seed=1,count=2", "--checks", "nope"],
        vec!["--metric", &m, "--points", "random:seed=1,count=2", "--format", "yaml"],
        vec!["--metric", &m, "--points", "random:seed=1,count=2", "--tol", "-1"],
        vec!["--metric", &m, "--points", &zero],
    ];
    for args in cases {
        let mut full = vec!["report"];
        full.extend(args.iter().copied());
        let out = finslerc(&full);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn empty_check_set_is_metadata_only() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "e.json", EUCLIDEAN);
    let out = finslerc(&["report", "--metric", &m, "--points", "random:seed=1,count=2", "--checks", ""]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["points"], Value::Array(vec![]));
    assert_eq!(r["aggregate"], Value::Object(Default::default()));
    let conv = &r["metadata"]["conventions"];
    assert!(conv["ricci_trace"].as_str().unwrap().contains("trace"));
    assert_eq!(r["metadata"]["metric"]["kind"], "euclidean");
    assert!(r["metadata"]["versions"]["finsler-core"].is_string());
}

#[test]
fn explicit_points_and_text_format() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "s.json", SPHERE3);
    let pts = write(
        dir.path(),
        "p.json",
        r#"[{"x": [0.1, -0.2, 0.0], "y": [1.0, 0.5, -0.3]}, {"x": [0.0, 0.0, 0.3], "y": [0.0, 1.0, 0.0]}]"#,
    );
    let out = finslerc(&["report", "--metric", &m, "--points", &pts, "--checks", "axioms,classify", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("status   OK"));
    let line = text.lines().find(|l| l.starts_with("generalized_ricci")).unwrap();
    assert!(line.contains("pass") && line.contains("2.0000000000"), "{line}");
}
