use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csi-gait")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn missing_config_exits_with_one() {
    let o = cli(&["run", "--config", "definitely/missing.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.json"));
}

#[test]
fn bad_usage_exits_with_one() {
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
}

#[test]
fn default_config_is_valid_json() {
    let o = cli(&["default-config"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["scenarios"].as_array().unwrap().len(), 7);
    assert_eq!(v["methods"].as_array().unwrap().len(), 6);
}

#[test]
fn diagnose_prints_hand_computed_values() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("f.csv");
    // centroids (1,0) and (11,0): ISD 10, ISV 1 per class; dimension 0 is
    // disjoint (0 %) and dimension 1 constant (100 %)
    std::fs::write(&csv, "label,f1,f2\n0,0,0\n0,2,0\n1,10,0\n1,12,0\n").unwrap();
    let o = cli(&["diagnose", p(&csv), "--acc2", "0.5", "--acc10", "0.25"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    for line in ["ISV = 1.000000", "ISD = 10.000000", "ISV/ISD = 0.100000", "Overlap = 50.0%", "PDR = 50.0%"] {
        assert!(out.contains(line), "missing {line:?} in\n{out}");
    }
    std::fs::write(&csv, "label,f1\nx,1\n").unwrap();
    assert_eq!(cli(&["diagnose", p(&csv)]).status.code(), Some(2));
}

#[test]
fn synthesized_directories_feed_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut scenarios = Vec::new();
    for (name, id) in [("a", 2), ("b", 7)] {
        let cfg = dir.path().join(format!("{name}.json"));
        std::fs::write(&cfg, format!(r#"{{"persons": 1, "person_ids": [{id}], "duration_s": 10}}"#)).unwrap();
        let out = dir.path().join(name);
        let o = cli(&["synth", "--config", p(&cfg), "--seed", "5", "--trials", "5", "--out", p(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join("trial_004.csv").exists() && out.join("trial_004.truth.csv").exists());
        scenarios.push(format!(r#"{{"id": "{name}", "data_dir": {:?}}}"#, p(&out)));
    }
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        format!(r#"{{"methods": ["pca", "nmf"], "training_scope": "global", "scenarios": [{}]}}"#, scenarios.join(",")),
    )
    .unwrap();
    let out = dir.path().join("report");
    let o = cli(&["run", "--config", p(&cfg), "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["summary.csv", "per_scenario.csv", "accuracy_vs_persons.csv", "report.txt", "run_result.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(stdout(&o).contains("NMF"));

    let again = dir.path().join("again");
    let o = cli(&["report", p(&out.join("run_result.json")), "--out", p(&again)]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(out.join("summary.csv")).unwrap(), std::fs::read(again.join("summary.csv")).unwrap());
}

#[test]
fn identical_runs_write_identical_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"seed": 11, "methods": ["fastica", "sobi"], "scenarios": [
            {"id": "A", "persons": 1, "trials": 5, "participants": [0, 1], "duration_s": 10},
            {"id": "B", "persons": 2, "trials": 5, "participants": [0, 1, 2], "duration_s": 10, "snr_db": 15}]}"#,
    )
    .unwrap();
    let mut sums = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("r{i}"));
        let o = cli(&["run", "--config", p(&cfg), "--out", p(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        sums.push(std::fs::read(out.join("summary.csv")).unwrap());
    }
    assert_eq!(sums[0], sums[1]);
}
