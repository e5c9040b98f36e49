use std::process::{Command, Output};

use kere_cli::builtins::builtins;
use kere_cli::{run, Command as Job, JobConfig};
use serde_json::Value;

fn kere(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kere")).args(args).output().unwrap()
}

fn schema() -> jsonschema::JSONSchema {
    let text = include_str!("../schema/report.schema.json");
    let doc: Value = serde_json::from_str(text).unwrap();
    jsonschema::JSONSchema::compile(&doc).unwrap()
}

fn assert_valid(report: &Value) {
    let s = schema();
    let msgs: Vec<String> = match s.validate(report) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "report does not match the schema: {msgs:#?}");
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_str().unwrap().parse().unwrap()
}

#[test]
fn classify_hyperbolic_mobius() {
    let doc = r#"{"kind": "mobius", "params": {"a": 2, "b": 0, "c": 0, "d": 1}}"#;
    let r = report(&kere(&["--command", "classify", "--map", doc, "--horizon", "300"]));
    assert_valid(&r);
    assert_eq!(r["result"]["class"], "Hyperbolic");
    assert_eq!(r["result"]["singular_clusters"], 2);
    assert_eq!(r["config"]["horizon"], 300);
    assert_eq!(r["config"]["eps"], "0.1");
    assert_eq!(r["diagnostics"]["status"], "ok");
}

#[test]
fn analyze_rotation_profile_is_singular_almost_everywhere() {
    let r = report(&kere(&["--command", "analyze", "--map", "rotation_profile"]));
    assert_valid(&r);
    assert!(num(&r["result"]["singular_fraction"]) >= 0.95);
}

#[test]
fn render_writes_parseable_svg() {
    let dir = tempfile::tempdir().unwrap();
    let doc = r#"{"kind": "torus_translation", "params": {"alpha": 0.6180339887498949, "beta": 0}}"#;
    let out = kere(&[
        "--command", "render", "--map", doc, "--horizon", "200",
        "--out", dir.path().to_str().unwrap(), "--format", "json,svg,png,csv",
    ]);
    assert!(out.status.success());
    let svg = std::fs::read_to_string(dir.path().join("render.svg")).unwrap();
    let xml = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(xml.root_element().tag_name().name(), "svg");
    assert!(xml.descendants().any(|n| n.has_tag_name("polyline")));
    let png = std::fs::read(dir.path().join("render.png")).unwrap();
    assert_eq!(&png[..4], b"\x89PNG");
    let csv = std::fs::read_to_string(dir.path().join("render.csv")).unwrap();
    assert_eq!(csv.lines().count(), 202);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("render.json")).unwrap()).unwrap();
    assert_valid(&r);
}

#[test]
fn config_errors_exit_with_two() {
    let bad = [
        vec!["--command", "classify", "--map", "no_such_map"],
        vec!["--command", "classify", "--map", "{\"kind\": \"rotation\"}"],
        vec!["--command", "classify", "--map", "{not json"],
        vec!["--command", "classify"],
        vec!["--command", "classify", "--map", "rotation", "--grid", "2"],
        vec!["--command", "classify", "--map", "rotation", "--threshold", "0"],
        vec!["--command", "render", "--map", "rotation", "--format", "svg"],
        vec!["--command", "frobnicate", "--map", "rotation"],
        vec!["--command", "classify", "--map", "rotation", "--eps", "x"],
    ];
    for args in bad {
        let out = kere(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let out = Command::new(env!("CARGO_BIN_EXE_kere"))
        .args(["--command", "render", "--map", "rotation"])
        .env("KERE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn undetermined_conjugacy_exits_cleanly() {
    let out = Command::new(env!("CARGO_BIN_EXE_kere"))
        .args(["--command", "conjugate", "--map", "hyperbolic", "--horizon", "300"])
        .env("KERE_THREADS", "1")
        .output()
        .unwrap();
    let r = report(&out);
    assert_valid(&r);
    assert_eq!(r["diagnostics"]["status"], "undetermined");
    assert_eq!(r["result"]["status"], "undetermined");
}

#[test]
fn map_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.json");
    std::fs::write(&path, r#"{"surface": "klein", "kind": "klein_psi", "params": {"alpha": "0.25"}}"#).unwrap();
    let r = report(&kere(&["--command", "render", "--map", path.to_str().unwrap(), "--horizon", "8"]));
    assert_eq!(r["config"]["map"]["kind"], "klein_psi");
    assert_eq!(r["result"]["points"].as_array().unwrap().len(), 9);
}

#[test]
fn gallery_classifies_every_builtin() {
    let mut config = JobConfig::new(Job::Gallery);
    config.grid = 48;
    config.horizon = 300;
    let out = run(&config).unwrap();
    assert_valid(&out.report);
    let rows = out.report["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), builtins().len());
    for row in rows {
        assert_eq!(row["agree"], true, "{row}");
    }
}
