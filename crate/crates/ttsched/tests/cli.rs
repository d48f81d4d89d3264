use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn ttsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ttsched")).args(args).output().expect("running ttsched")
}

fn ok(args: &[&str]) -> String {
    let out = ttsched(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn schedule_then_verify() {
    let dir = TempDir::new().unwrap();
    let flows = dir.path().join("flows.csv");
    ok(&["flows", "--topology", "afdx", "--count", "12", "--seed", "5", "-o", s(&flows)]);
    for (scheme, mode) in [("hfs_llf", "hfs"), ("bfs_s", "fcs"), ("iras", "fcs"), ("jras_tseg", "fcs"), ("hfs_exact", "hfs")] {
        let sched = dir.path().join(format!("{scheme}.json"));
        ok(&["schedule", "--scheme", scheme, "--topology", "afdx", "--flows", s(&flows), "-o", s(&sched)]);
        let report = ok(&["verify", "--mode", mode, "--topology", "afdx", "--flows", s(&flows), "--schedule", s(&sched)]);
        assert!(report.contains("\"ok\": true"), "{scheme}: {report}");
    }
}

#[test]
fn tampered_schedule_fails_verification() {
    let dir = TempDir::new().unwrap();
    let flows = dir.path().join("flows.csv");
    let sched = dir.path().join("s.json");
    ok(&["flows", "--topology", "ladder", "--count", "6", "--cycles", "2,4", "--seed", "2", "-o", s(&flows)]);
    ok(&["schedule", "--scheme", "hfs_llf", "--topology", "ladder", "--flows", s(&flows), "-o", s(&sched)]);
    let mut doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&sched).unwrap()).unwrap();
    // two packets on the same link-slots
    doc["paths"][1]["hops"] = doc["paths"][0]["hops"].clone();
    fs::write(&sched, doc.to_string()).unwrap();
    let out = ttsched(&["verify", "--mode", "hfs", "--topology", "ladder", "--flows", s(&flows), "--schedule", s(&sched)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn generators_are_seeded() {
    let a = ok(&["flows", "--topology", "er:12:0.3", "--count", "10", "--seed", "9"]);
    let b = ok(&["flows", "--topology", "er:12:0.3", "--count", "10", "--seed", "9"]);
    let c = ok(&["flows", "--topology", "er:12:0.3", "--count", "10", "--seed", "10"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(ok(&["topo", "er:8:0.4", "--seed", "1"]), ok(&["topo", "er:8:0.4", "--seed", "1"]));
}

#[test]
fn analyze_and_export() {
    assert_eq!(ok(&["analyze", "--collides", "1:4", "3:6"]), "true\n");
    assert_eq!(ok(&["analyze", "--collides", "1:4", "2:6"]), "false\n");
    assert_eq!(ok(&["analyze", "--blocked", "3:4", "--other-cycle", "6", "--horizon", "12"]), "3,5,7,9,11\n");

    let dir = TempDir::new().unwrap();
    let flows = dir.path().join("flows.csv");
    ok(&["flows", "--topology", "afdx", "--count", "3", "--cycles", "2", "--seed", "1", "-o", s(&flows)]);
    let lp = ok(&["export-lp", "--mode", "fcs", "--topology", "afdx", "--flows", s(&flows)]);
    assert!(lp.lines().any(|l| l == "Maximize"));
    assert!(lp.trim_end().ends_with("End"));
    let counts = ok(&["count-solutions", "--topology", "afdx", "--flows", s(&flows)]);
    assert_eq!(counts.lines().count(), 4);
}

#[test]
fn experiment_output_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"name": "small", "topology": "ladder",
            "flow_gen": {"count": 4, "cycles": [2, 4], "seed": 3},
            "counts": [2, 4], "schedulers": ["hfs_exact", "hfs_llf", "bfs_s"], "time_limit": 10}"#,
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let csv = ok(&["experiment", "--config", s(&cfg), "--output-dir", s(&a)]);
    ok(&["experiment", "--config", s(&cfg), "--output-dir", s(&b)]);
    assert_eq!(csv.lines().count(), 7);
    let long = |d: &Path| fs::read(d.join("results_long.csv")).unwrap();
    assert_eq!(long(&a), long(&b));
    assert!(a.join("results.json").exists());
}

#[test]
fn bad_input_exits_with_two() {
    let out = ttsched(&["flows", "--topology", "nope.json", "--count", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ttsched(&["flows", "--topology", "ladder", "--count", "1000"]);
    assert_eq!(out.status.code(), Some(2));
}
