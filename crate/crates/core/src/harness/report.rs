use std::path::{Path, PathBuf};

use super::pipeline::{RunResult, Split, TrialRecord};
use super::ExperimentConfig;
use crate::diagnostics::{
    classification_metrics, feature_diagnostics, pdr, DiagnosticsReport, MethodSummary, ScenarioSummary,
};
use crate::error::{Error, Result};

/// Prediction code for a person no source was assigned to.
const NO_PREDICTION: u32 = u32::MAX;

fn accuracy_of(evals: &[(u32, u32)]) -> Option<f64> {
    if evals.is_empty() {
        None
    } else {
        Some(evals.iter().filter(|(t, p)| t == p).count() as f64 / evals.len() as f64)
    }
}

fn test_evaluations<'a>(trials: impl Iterator<Item = &'a TrialRecord>, mi: usize) -> Vec<(u32, u32)> {
    trials
        .filter(|t| t.split == Split::Test)
        .flat_map(|t| {
            let evals: Vec<(u32, u32)> = match t.methods.get(mi) {
                Some(m) if !m.evaluations.is_empty() => {
                    m.evaluations.iter().map(|e| (e.person, e.predicted.unwrap_or(NO_PREDICTION))).collect()
                }
                // failed before separation: every walker is missed
                _ => t.persons.iter().map(|&p| (p, NO_PREDICTION)).collect(),
            };
            evals
        })
        .collect()
}

fn labelled_features<'a>(trials: impl Iterator<Item = &'a TrialRecord>, mi: usize) -> (Vec<Vec<f64>>, Vec<u32>) {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for t in trials {
        if let Some(m) = t.methods.get(mi) {
            for s in &m.sources {
                if let Some(l) = s.diagnostic_label() {
                    x.push(s.features.clone());
                    y.push(l);
                }
            }
        }
    }
    (x, y)
}

/// Recomputes the diagnostics report from trial records alone.
pub fn aggregate(cfg: &ExperimentConfig, trials: &[TrialRecord]) -> Result<DiagnosticsReport> {
    if cfg.methods.is_empty() {
        return Err(Error::invalid("no methods to report"));
    }
    let mut environments: Vec<String> = Vec::new();
    for s in &cfg.scenarios {
        if !environments.contains(&s.environment) {
            environments.push(s.environment.clone());
        }
    }
    let mut methods = Vec::new();
    let mut scenarios = Vec::new();
    for (mi, method) in cfg.methods.iter().enumerate() {
        let evals = test_evaluations(trials.iter(), mi);
        let (pred, truth): (Vec<u32>, Vec<u32>) = evals.iter().map(|&(t, p)| (p, t)).unzip();
        let metrics =
            if evals.is_empty() { None } else { Some(classification_metrics::<f64>(&pred, &truth, cfg.averaging)?) };
        let env_accuracy = environments
            .iter()
            .map(|e| (e.clone(), accuracy_of(&test_evaluations(trials.iter().filter(|t| &t.environment == e), mi))))
            .collect();
        let (x, y) = labelled_features(trials.iter(), mi);
        let diag = if x.is_empty() { None } else { Some(feature_diagnostics(&x, &y)?) };
        let by_crowd = |k: usize| accuracy_of(&test_evaluations(trials.iter().filter(|t| t.persons.len() == k), mi));
        let pdr_v = match (by_crowd(2), by_crowd(10)) {
            (Some(a2), Some(a10)) if a2 > 0.0 => Some(pdr(a2, a10)?),
            _ => None,
        };
        methods.push(MethodSummary {
            method: method.name().to_string(),
            accuracy: metrics.map_or(0.0, |m| m.accuracy),
            precision: metrics.map_or(0.0, |m| m.precision),
            recall: metrics.map_or(0.0, |m| m.recall),
            f1: metrics.map_or(0.0, |m| m.f1),
            env_accuracy,
            isv: diag.as_ref().map(|d| d.isv_mean),
            isd: diag.as_ref().and_then(|d| d.isd),
            pdr: pdr_v,
            overlap: diag.as_ref().and_then(|d| d.overlap),
        });

        for s in &cfg.scenarios {
            let members: Vec<&TrialRecord> = trials.iter().filter(|t| t.scenario == s.id).collect();
            let failed = members
                .iter()
                .filter(|t| t.error.is_some() || t.methods.get(mi).is_none_or(|m| m.error.is_some()))
                .count();
            let evals = test_evaluations(members.iter().copied(), mi);
            let ps: Vec<usize> = members.iter().filter_map(|t| t.estimated_p).collect();
            let (x, y) = labelled_features(members.iter().copied(), mi);
            let diag = if x.is_empty() { None } else { Some(feature_diagnostics(&x, &y)?) };
            let persons = if s.data_dir.is_some() {
                members.iter().map(|t| t.persons.len()).max().unwrap_or(0)
            } else {
                s.persons
            };
            scenarios.push(ScenarioSummary {
                scenario: s.id.clone(),
                environment: s.environment.clone(),
                persons,
                method: method.name().to_string(),
                trials: members.len(),
                failed_trials: failed,
                evaluated_sources: evals.len(),
                accuracy: accuracy_of(&evals),
                mean_estimated_p: if ps.is_empty() {
                    None
                } else {
                    Some(ps.iter().sum::<usize>() as f64 / ps.len() as f64)
                },
                isv: diag.as_ref().map(|d| d.isv_mean),
                isd: diag.as_ref().and_then(|d| d.isd),
                isv_isd_ratio: diag.as_ref().and_then(|d| d.isv_isd_ratio),
            });
        }
    }
    Ok(DiagnosticsReport { environments, methods, scenarios })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub summary: PathBuf,
    pub per_scenario: PathBuf,
    pub accuracy_vs_persons: PathBuf,
    pub text: PathBuf,
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `summary.csv`, `per_scenario.csv`, `accuracy_vs_persons.csv` and
/// `report.txt` into `dir`.
pub fn emit_report(result: &RunResult, dir: &Path) -> Result<ReportFiles> {
    if result.report.methods.is_empty() {
        return Err(Error::invalid("report has no methods"));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = ReportFiles {
        summary: dir.join("summary.csv"),
        per_scenario: dir.join("per_scenario.csv"),
        accuracy_vs_persons: dir.join("accuracy_vs_persons.csv"),
        text: dir.join("report.txt"),
    };
    write(&files.summary, &result.report.summary_csv())?;
    write(&files.per_scenario, &result.report.per_scenario_csv())?;
    write(&files.accuracy_vs_persons, &result.report.accuracy_vs_persons_csv())?;
    write(&files.text, &result.report.text_table())?;
    Ok(files)
}

pub fn save_run_result(result: &RunResult, path: &Path) -> Result<()> {
    let text = serde_json::to_string(result).map_err(|e| Error::Format(e.to_string()))?;
    write(path, &text)
}

/// Loads a saved run and re-aggregates its report from the trial records.
pub fn load_run_result(path: &Path) -> Result<RunResult> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut result: RunResult =
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    result.report = aggregate(&result.config, &result.trials)?;
    Ok(result)
}
