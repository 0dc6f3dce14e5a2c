use csi_gait::csi_data::{save_ground_truth, save_trial, synthesize, SynthConfig};
use csi_gait::diagnostics::DiagnosticsReport;
use csi_gait::harness::{
    emit_report, load_run_result, run_experiment, save_run_result, ExperimentConfig, ScenarioConfig, Split,
};
use csi_gait::separation::Method;
use csi_gait::Error;

fn scenario(id: &str, persons: usize, trials: usize, pool: &[u32], snr: f64) -> ScenarioConfig {
    ScenarioConfig {
        id: id.into(),
        persons,
        trials,
        participants: Some(pool.to_vec()),
        snr_db: snr,
        ..Default::default()
    }
}

fn accuracy(report: &DiagnosticsReport, scenario: &str, method: &str) -> f64 {
    report.scenarios.iter().find(|s| s.scenario == scenario && s.method == method).unwrap().accuracy.unwrap()
}

#[test]
fn two_person_nmf_identifies_walkers() {
    let cfg = ExperimentConfig {
        seed: 7,
        methods: vec![Method::NMF],
        scenarios: vec![scenario("R", 1, 8, &[0, 5], 30.0), scenario("B", 2, 20, &[0, 5], 30.0)],
        ..Default::default()
    };
    let r = run_experiment(&cfg).unwrap();
    let acc = accuracy(&r.report, "B", "NMF");
    assert!(acc >= 0.8, "2-person NMF accuracy {acc}");
    // enumeration sees both walkers in the clean regime
    assert!(r.trials.iter().filter(|t| t.scenario == "B").all(|t| t.estimated_p == Some(2)));
}

#[test]
fn single_person_identification() {
    let cfg = ExperimentConfig {
        seed: 7,
        methods: vec![Method::SOBI, Method::NMF],
        scenarios: vec![scenario("R", 1, 24, &[0, 3, 6, 9], 30.0)],
        ..Default::default()
    };
    let r = run_experiment(&cfg).unwrap();
    for m in ["SOBI", "NMF"] {
        let acc = accuracy(&r.report, "R", m);
        assert!(acc >= 0.9, "{m}: {acc}");
    }
}

fn small_config() -> ExperimentConfig {
    let mut a = scenario("A", 1, 6, &[0, 1], 30.0);
    a.duration_s = 12.0;
    let mut b = scenario("B", 2, 6, &[0, 1], 20.0);
    b.duration_s = 12.0;
    b.environment = "Classroom".into();
    ExperimentConfig { seed: 3, scenarios: vec![a, b], ..Default::default() }
}

#[test]
fn report_covers_every_method_and_scenario() {
    let cfg = small_config();
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.report.methods.len(), 6);
    assert_eq!(r.report.scenarios.len(), 12);
    assert_eq!(r.report.environments, vec!["Lab".to_string(), "Classroom".to_string()]);
    let summary = r.report.summary_csv();
    assert_eq!(summary.lines().count(), 7);
    assert_eq!(summary.lines().next().unwrap(), "Method,Acc,Prec,Rec,F1,Acc_Lab,Acc_Classroom,ISV,ISD,PDR,Overlap");
    let parsed = DiagnosticsReport::parse_summary_csv(&summary).unwrap();
    assert_eq!(parsed.summary_csv(), summary);
    // stratified 70/30 split of each six-trial scenario
    for id in ["A", "B"] {
        let test = r.trials.iter().filter(|t| t.scenario == id && t.split == Split::Test).count();
        assert_eq!(test, 2, "{id}");
    }

    let dir = tempfile::tempdir().unwrap();
    let files = emit_report(&r, dir.path()).unwrap();
    assert_eq!(std::fs::read_to_string(&files.summary).unwrap(), summary);
    for f in [&files.per_scenario, &files.accuracy_vs_persons, &files.text] {
        assert!(std::fs::metadata(f).unwrap().len() > 0);
    }

    let saved = dir.path().join("run.json");
    save_run_result(&r, &saved).unwrap();
    let back = load_run_result(&saved).unwrap();
    assert_eq!(back.report, r.report);

    let mut empty = r.clone();
    empty.report.methods.clear();
    assert!(matches!(emit_report(&empty, dir.path()), Err(Error::InvalidInput(_))));
}

#[test]
fn runs_are_deterministic() {
    let mut cfg = small_config();
    cfg.methods = vec![Method::FastICA, Method::NMF];
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a.report.summary_csv(), b.report.summary_csv());
    assert_eq!(a.report.per_scenario_csv(), b.report.per_scenario_csv());
}

#[test]
fn trials_load_from_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    for i in 0..6u64 {
        let ids = if i % 2 == 0 { vec![1] } else { vec![4] };
        let cfg =
            SynthConfig { persons: 1, person_ids: Some(ids), duration_s: 12.0, seed: 100 + i, ..Default::default() };
        let (trial, truth) = synthesize(&cfg).unwrap();
        let path = dir.path().join(format!("trial_{i:03}.csv"));
        save_trial(&trial, &path).unwrap();
        save_ground_truth(&truth, &trial.timestamps_us, &path).unwrap();
    }
    let s = ScenarioConfig { id: "D".into(), data_dir: Some(dir.path().to_path_buf()), ..Default::default() };
    let cfg = ExperimentConfig { methods: vec![Method::PCA, Method::NMF], scenarios: vec![s], ..Default::default() };
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.trials.len(), 6);
    assert!(r.trials.iter().all(|t| t.has_truth && t.error.is_none() && t.source_file.is_some()));
    assert_eq!(r.report.scenarios[0].persons, 1);
}
