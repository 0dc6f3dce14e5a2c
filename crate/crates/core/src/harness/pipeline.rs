use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, LabelingMode, PersonCountMode, ScenarioConfig, TrainingScope};
use crate::classifier::{train, TrainedClassifier};
use crate::csi_data::{
    load_ground_truth, load_trial, sidecar_path, synthesize, CsiTrial, GroundTruth, SynthConfig, TrialMeta,
};
use crate::diagnostics::DiagnosticsReport;
use crate::enumeration::estimate_count;
use crate::error::{Error, Result};
use crate::features::extract;
use crate::numerics::{derive_seed, Matrix, SeededRng};
use crate::preprocess::preprocess;
use crate::separation::{best_assignment, correlation, separate, Method, SeparationRequest};

/// Assignment problems up to this size are solved exhaustively.
const ASSIGNMENT_EXHAUSTIVE: usize = 5;
/// Index of `spectral_entropy` in the feature vector.
const SPECTRAL_ENTROPY: usize = 10;
const SPLIT_STREAM: u64 = 0x5EED;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub features: Vec<f64>,
    /// Person whose ground-truth waveform this source was aligned to.
    pub truth_person: Option<u32>,
    pub truth_correlation: Option<f64>,
    /// Identity used for training (training trials only).
    pub train_label: Option<u32>,
    /// Classifier output (test trials only).
    pub predicted: Option<u32>,
}

impl SourceRecord {
    /// Identity used by the feature-space diagnostics.
    pub fn diagnostic_label(&self) -> Option<u32> {
        self.truth_person.or(self.train_label)
    }
}

/// Outcome for one person walking in a test trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonEvaluation {
    pub person: u32,
    pub source: Option<usize>,
    pub predicted: Option<u32>,
}

impl PersonEvaluation {
    pub fn correct(&self) -> bool {
        self.predicted == Some(self.person)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodTrialRecord {
    pub method: String,
    pub converged: bool,
    pub iterations: usize,
    pub low_confidence: bool,
    pub error: Option<String>,
    pub sources: Vec<SourceRecord>,
    pub evaluations: Vec<PersonEvaluation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub scenario: String,
    pub environment: String,
    pub trial: usize,
    pub seed: u64,
    pub source_file: Option<PathBuf>,
    pub persons: Vec<u32>,
    pub split: Split,
    pub estimated_p_raw: Option<usize>,
    pub estimated_p: Option<usize>,
    pub p_used: Option<usize>,
    pub fill_fraction: Option<f64>,
    pub has_truth: bool,
    pub error: Option<String>,
    /// One entry per configured method, in configuration order.
    pub methods: Vec<MethodTrialRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub method: String,
    /// Scenario id for per-scenario training; empty for a global model.
    pub scope: String,
    pub samples: usize,
    pub classes: Vec<u32>,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRecord>,
    pub models: Vec<ModelRecord>,
    pub report: DiagnosticsReport,
}

struct TrialPlan {
    scenario: usize,
    trial: usize,
    seed: u64,
    persons: Vec<u32>,
    file: Option<PathBuf>,
    split: Split,
}

fn trial_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::Config(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.ends_with(".csv") && !name.ends_with(".truth.csv")
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Config(format!("no trial files in {}", dir.display())));
    }
    Ok(files)
}

fn file_persons(path: &Path) -> Result<Vec<u32>> {
    let meta_path = sidecar_path(path);
    let text =
        std::fs::read_to_string(&meta_path).map_err(|e| Error::Config(format!("{}: {e}", meta_path.display())))?;
    let meta: TrialMeta =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", meta_path.display())))?;
    Ok(meta.person_ids)
}

/// Stratified split: within each scenario, trials sharing a participant set
/// are shuffled and the first `train_fraction` of them (at least one, and
/// leaving at least one when the group has two or more) go to training.
fn assign_splits(plans: &mut [TrialPlan], seed: u64, train_fraction: f64) {
    let mut groups: BTreeMap<(usize, Vec<u32>), Vec<usize>> = BTreeMap::new();
    for (i, p) in plans.iter().enumerate() {
        groups.entry((p.scenario, p.persons.clone())).or_default().push(i);
    }
    for ((scenario, _), mut idx) in groups {
        let first = plans[idx[0]].trial as u64;
        let mut rng = SeededRng::with_stream(derive_seed(seed, &[scenario as u64, first]), SPLIT_STREAM);
        rng.shuffle(&mut idx);
        let g = idx.len();
        let mut n_train = ((g as f64) * train_fraction).round() as usize;
        n_train = n_train.clamp(1, g.saturating_sub(1).max(1));
        for (r, &i) in idx.iter().enumerate() {
            plans[i].split = if r < n_train { Split::Train } else { Split::Test };
        }
    }
}

fn plan_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialPlan>> {
    let mut plans = Vec::new();
    for (si, s) in cfg.scenarios.iter().enumerate() {
        if let Some(dir) = &s.data_dir {
            for (ti, f) in trial_files(dir)?.into_iter().enumerate() {
                plans.push(TrialPlan {
                    scenario: si,
                    trial: ti,
                    seed: derive_seed(cfg.seed, &[si as u64, ti as u64]),
                    persons: file_persons(&f)?,
                    file: Some(f),
                    split: Split::Train,
                });
            }
        } else {
            for ti in 0..s.trials {
                plans.push(TrialPlan {
                    scenario: si,
                    trial: ti,
                    seed: derive_seed(cfg.seed, &[si as u64, ti as u64]),
                    persons: s.trial_persons(ti),
                    file: None,
                    split: Split::Train,
                });
            }
        }
    }
    assign_splits(&mut plans, cfg.seed, cfg.train_fraction);
    Ok(plans)
}

fn obtain_trial(
    cfg: &ExperimentConfig,
    s: &ScenarioConfig,
    plan: &TrialPlan,
) -> Result<(CsiTrial<f64>, Option<GroundTruth<f64>>)> {
    match &plan.file {
        Some(f) => Ok((load_trial(f)?, load_ground_truth(f)?)),
        None => {
            let synth = SynthConfig {
                persons: plan.persons.len(),
                duration_s: s.duration_s,
                sample_rate_hz: s.sample_rate_hz,
                snr_db: s.snr_db,
                multipath_taps: s.multipath_taps,
                seed: plan.seed,
                person_ids: Some(plan.persons.clone()),
                cadences_hz: None,
                population_seed: cfg.population_seed,
                scenario_id: s.id.clone(),
            };
            let (trial, truth) = synthesize(&synth)?;
            Ok((trial, Some(truth)))
        }
    }
}

/// |correlation| of every truth column against every source column over the
/// common prefix.
fn truth_scores(truth: &Matrix<f64>, sources: &Matrix<f64>) -> Matrix<f64> {
    let n = truth.rows().min(sources.rows());
    let t: Vec<Vec<f64>> = truth.columns().into_iter().map(|c| c[..n].to_vec()).collect();
    let s: Vec<Vec<f64>> = sources.columns().into_iter().map(|c| c[..n].to_vec()).collect();
    Matrix::from_fn(t.len(), s.len(), |i, j| correlation(&t[i], &s[j]).abs())
}

fn run_method(
    cfg: &ExperimentConfig,
    method: Method,
    seed: u64,
    p: usize,
    norm: &crate::preprocess::NormalizedTrial<f64>,
    truth: Option<&GroundTruth<f64>>,
) -> MethodTrialRecord {
    let mut rec = MethodTrialRecord {
        method: method.name().to_string(),
        converged: false,
        iterations: 0,
        low_confidence: false,
        error: None,
        sources: Vec::new(),
        evaluations: Vec::new(),
    };
    let req = SeparationRequest::from_normalized(norm, method, p, seed);
    let res = match separate(&req, &cfg.separation) {
        Ok(r) => r,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    rec.converged = res.converged;
    rec.iterations = res.iterations;
    rec.low_confidence = res.low_confidence;
    let antennas = norm.antenna_series();
    let mut sources = Vec::with_capacity(res.sources.cols());
    for col in res.sources.columns() {
        match extract(&col, &antennas, norm.sample_rate_hz, None) {
            Ok(f) if f.is_finite() => sources.push(SourceRecord {
                features: f.values,
                truth_person: None,
                truth_correlation: None,
                train_label: None,
                predicted: None,
            }),
            Ok(_) => {
                rec.error = Some("non-finite features".into());
                return rec;
            }
            Err(e) => {
                rec.error = Some(e.to_string());
                return rec;
            }
        }
    }
    if let Some(truth) = truth {
        let scores = truth_scores(&truth.sources, &res.sources);
        for (i, j) in best_assignment(&scores, ASSIGNMENT_EXHAUSTIVE).into_iter().enumerate() {
            if let Some(j) = j {
                sources[j].truth_person = Some(truth.person_ids[i]);
                sources[j].truth_correlation = Some(scores[(i, j)]);
            }
        }
    }
    rec.sources = sources;
    rec
}

fn process_trial(cfg: &ExperimentConfig, plan: &TrialPlan) -> TrialRecord {
    let s = &cfg.scenarios[plan.scenario];
    let mut rec = TrialRecord {
        scenario: s.id.clone(),
        environment: s.environment.clone(),
        trial: plan.trial,
        seed: plan.seed,
        source_file: plan.file.clone(),
        persons: plan.persons.clone(),
        split: plan.split,
        estimated_p_raw: None,
        estimated_p: None,
        p_used: None,
        fill_fraction: None,
        has_truth: false,
        error: None,
        methods: Vec::new(),
    };
    let staged = (|| -> Result<_> {
        let (trial, truth) = obtain_trial(cfg, s, plan)?;
        let (norm, fill) = preprocess(&trial, &cfg.dropped_subcarriers, cfg.target_rate_hz)?;
        let est = estimate_count(&norm, cfg.energy_threshold, cfg.count_reduction)?;
        Ok((trial, truth, norm, fill, est))
    })();
    let (trial, truth, norm, fill, est) = match staged {
        Ok(v) => v,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    rec.persons = trial.person_ids.clone();
    rec.fill_fraction = Some(fill);
    rec.estimated_p_raw = Some(est.raw);
    rec.estimated_p = Some(est.clamped);
    rec.has_truth = truth.is_some();
    let m = norm.tensor.dims()[1];
    let p = match cfg.person_count_mode {
        PersonCountMode::Estimated => est.clamped,
        PersonCountMode::GroundTruth => trial.person_ids.len(),
    }
    .clamp(1, m);
    rec.p_used = Some(p);
    rec.methods = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(mi, &method)| {
            run_method(cfg, method, derive_seed(plan.seed, &[mi as u64 + 1]), p, &norm, truth.as_ref())
        })
        .collect();
    rec
}

fn usable(t: &TrialRecord, mi: usize) -> bool {
    t.error.is_none() && t.methods.get(mi).is_some_and(|m| m.error.is_none() && !m.sources.is_empty())
}

/// Per-dimension spread for centroid distances: the pooled within-person
/// standard deviation of the reference features, so traits that are stable
/// for a person weigh more than trial-to-trial nuisance. Falls back to the
/// overall spread when no person has two references. Dimensions that are
/// (numerically) constant over the references are ignored.
fn within_class_spread(refs: &[(u32, &Vec<f64>)], centroids: &BTreeMap<u32, Vec<f64>>) -> Vec<f64> {
    let d = refs[0].1.len();
    let n = refs.len();
    let dof = n.saturating_sub(centroids.len());
    let mean: Vec<f64> = (0..d).map(|j| refs.iter().map(|r| r.1[j]).sum::<f64>() / n as f64).collect();
    (0..d)
        .map(|j| {
            let total = refs.iter().map(|r| (r.1[j] - mean[j]).powi(2)).sum::<f64>() / n as f64;
            let within = if dof > 0 {
                refs.iter().map(|(l, f)| (f[j] - centroids[l][j]).powi(2)).sum::<f64>() / dof as f64
            } else {
                total
            };
            if total.sqrt() > 1e-9 * mean[j].abs().max(1.0) {
                within.max(1e-3 * total).sqrt()
            } else {
                // constant across every reference: carries no identity
                f64::INFINITY
            }
        })
        .collect()
}

fn scaled_distance(a: &[f64], b: &[f64], sd: &[f64]) -> f64 {
    a.iter().zip(b).zip(sd).map(|((x, y), s)| ((x - y) / s).powi(2)).sum::<f64>().sqrt()
}

/// Fills `train_label` on the sources of training trials for method `mi`.
fn label_training_sources(trials: &mut [TrialRecord], mi: usize, mode: LabelingMode) {
    if mode == LabelingMode::GroundTruth {
        for t in trials.iter_mut().filter(|t| t.split == Split::Train && usable(t, mi)) {
            for s in &mut t.methods[mi].sources {
                s.train_label = s.truth_person;
            }
        }
        return;
    }
    // Single-person trials: the most periodic source is the walker.
    for t in trials.iter_mut().filter(|t| t.split == Split::Train && t.persons.len() == 1 && usable(t, mi)) {
        let person = t.persons[0];
        let sources = &mut t.methods[mi].sources;
        let best = (0..sources.len())
            .min_by(|&a, &b| sources[a].features[SPECTRAL_ENTROPY].total_cmp(&sources[b].features[SPECTRAL_ENTROPY]))
            .unwrap();
        sources[best].train_label = Some(person);
    }
    let refs: Vec<(u32, &Vec<f64>)> = trials
        .iter()
        .filter(|t| t.split == Split::Train && t.persons.len() == 1 && usable(t, mi))
        .flat_map(|t| t.methods[mi].sources.iter().filter_map(|s| s.train_label.map(|l| (l, &s.features))))
        .collect();
    if refs.is_empty() {
        return;
    }
    let mut sums: BTreeMap<u32, (Vec<f64>, usize)> = BTreeMap::new();
    for (l, f) in &refs {
        let e = sums.entry(*l).or_insert_with(|| (vec![0.0; f.len()], 0));
        e.0.iter_mut().zip(f.iter()).for_each(|(a, b)| *a += b);
        e.1 += 1;
    }
    let centroids: BTreeMap<u32, Vec<f64>> =
        sums.into_iter().map(|(l, (s, c))| (l, s.into_iter().map(|v| v / c as f64).collect())).collect();
    let sd = within_class_spread(&refs, &centroids);

    for t in trials.iter_mut().filter(|t| t.split == Split::Train && t.persons.len() > 1 && usable(t, mi)) {
        let known: Vec<u32> = t.persons.iter().copied().filter(|p| centroids.contains_key(p)).collect();
        let sources = &mut t.methods[mi].sources;
        let scores = Matrix::from_fn(known.len(), sources.len(), |i, j| {
            -scaled_distance(&sources[j].features, &centroids[&known[i]], &sd)
        });
        for (i, j) in best_assignment(&scores, ASSIGNMENT_EXHAUSTIVE).into_iter().enumerate() {
            if let Some(j) = j {
                sources[j].train_label = Some(known[i]);
            }
        }
    }
}

enum Model {
    Svm(TrainedClassifier<f64>),
    Constant(u32),
    Missing,
}

impl Model {
    fn predict(&self, x: &[f64]) -> Option<u32> {
        match self {
            Model::Svm(m) => m.predict(x).ok().map(|p| p.label),
            Model::Constant(l) => Some(*l),
            Model::Missing => None,
        }
    }
}

fn fit_model(
    cfg: &ExperimentConfig,
    method: Method,
    scope: &str,
    trials: &[&TrialRecord],
    mi: usize,
) -> (Model, ModelRecord) {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for t in trials.iter().filter(|t| t.split == Split::Train && usable(t, mi)) {
        for s in &t.methods[mi].sources {
            if let Some(l) = s.train_label {
                x.push(s.features.clone());
                y.push(l);
            }
        }
    }
    let mut classes = y.clone();
    classes.sort_unstable();
    classes.dedup();
    let mut rec = ModelRecord {
        method: method.name().to_string(),
        scope: scope.to_string(),
        samples: x.len(),
        classes: classes.clone(),
        converged: true,
        error: None,
    };
    let model = match classes.len() {
        0 => {
            rec.error = Some("no labelled training sources".into());
            Model::Missing
        }
        1 => Model::Constant(classes[0]),
        _ => match train(&x, &y, &cfg.svm) {
            Ok(m) => {
                rec.converged = m.all_converged();
                Model::Svm(m)
            }
            Err(e) => {
                rec.error = Some(e.to_string());
                Model::Missing
            }
        },
    };
    (model, rec)
}

/// Predicts every source of a test trial and scores each walking person.
fn evaluate_trial(t: &mut TrialRecord, mi: usize, model: &Model) {
    let persons = t.persons.clone();
    let has_truth = t.has_truth;
    if !usable(t, mi) {
        if t.split == Split::Test {
            t.methods.get_mut(mi).into_iter().for_each(|m| {
                m.evaluations =
                    persons.iter().map(|&p| PersonEvaluation { person: p, source: None, predicted: None }).collect()
            });
        }
        return;
    }
    let rec = &mut t.methods[mi];
    for s in &mut rec.sources {
        s.predicted = model.predict(&s.features);
    }
    rec.evaluations = if has_truth {
        persons
            .iter()
            .map(|&p| {
                let src = rec.sources.iter().position(|s| s.truth_person == Some(p));
                PersonEvaluation { person: p, source: src, predicted: src.and_then(|j| rec.sources[j].predicted) }
            })
            .collect()
    } else {
        // Without ground truth a person counts as identified when some
        // source predicts them; the remaining persons take the leftover
        // sources in order.
        let mut free: Vec<usize> = (0..rec.sources.len()).collect();
        let mut out: Vec<Option<PersonEvaluation>> = vec![None; persons.len()];
        for (i, &p) in persons.iter().enumerate() {
            if let Some(k) = free.iter().position(|&j| rec.sources[j].predicted == Some(p)) {
                let j = free.remove(k);
                out[i] = Some(PersonEvaluation { person: p, source: Some(j), predicted: Some(p) });
            }
        }
        for (i, &p) in persons.iter().enumerate() {
            if out[i].is_none() {
                let j = if free.is_empty() { None } else { Some(free.remove(0)) };
                out[i] = Some(PersonEvaluation {
                    person: p,
                    source: j,
                    predicted: j.and_then(|j| rec.sources[j].predicted),
                });
            }
        }
        out.into_iter().map(Option::unwrap).collect()
    };
}

/// Runs every configured trial and aggregates the report. Trials run in
/// parallel; labelling, training and aggregation follow (scenario, trial)
/// order so the result is independent of scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunResult> {
    cfg.validate()?;
    let plans = plan_trials(cfg)?;
    let mut trials: Vec<TrialRecord> = plans.par_iter().map(|p| process_trial(cfg, p)).collect();

    let mut models = Vec::new();
    for (mi, &method) in cfg.methods.iter().enumerate() {
        label_training_sources(&mut trials, mi, cfg.labeling);
        let scopes: Vec<String> = match cfg.training_scope {
            TrainingScope::Global => vec![String::new()],
            TrainingScope::PerScenario => cfg.scenarios.iter().map(|s| s.id.clone()).collect(),
        };
        for scope in scopes {
            let in_scope = |t: &TrialRecord| scope.is_empty() || t.scenario == scope;
            let (model, rec) = {
                let members: Vec<&TrialRecord> = trials.iter().filter(|t| in_scope(t)).collect();
                fit_model(cfg, method, &scope, &members, mi)
            };
            models.push(rec);
            for t in trials.iter_mut().filter(|t| in_scope(t) && t.split == Split::Test) {
                evaluate_trial(t, mi, &model);
            }
        }
    }
    let report = super::aggregate(cfg, &trials)?;
    Ok(RunResult { config: cfg.clone(), trials, models, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::ScenarioConfig;

    fn plan(scenario: usize, trial: usize, persons: Vec<u32>) -> TrialPlan {
        TrialPlan { scenario, trial, seed: 0, persons, file: None, split: Split::Train }
    }

    #[test]
    fn split_is_stratified_by_participant_set() {
        let mut plans: Vec<TrialPlan> = (0..20).map(|i| plan(0, i, vec![i as u32 % 2])).collect();
        plans.extend((0..3).map(|i| plan(1, i, vec![7, 8])));
        assign_splits(&mut plans, 5, 0.7);
        for id in 0..2u32 {
            let train =
                plans.iter().filter(|p| p.scenario == 0 && p.persons == [id] && p.split == Split::Train).count();
            assert_eq!(train, 7);
        }
        let train = plans.iter().filter(|p| p.scenario == 1 && p.split == Split::Train).count();
        assert_eq!(train, 2);
        let again = {
            let mut p2: Vec<TrialPlan> = (0..20).map(|i| plan(0, i, vec![i as u32 % 2])).collect();
            assign_splits(&mut p2, 5, 0.7);
            p2.iter().map(|p| p.split).collect::<Vec<_>>()
        };
        assert_eq!(again, plans[..20].iter().map(|p| p.split).collect::<Vec<_>>());
    }

    #[test]
    fn truth_alignment_ignores_source_order_and_sign() {
        let mut rng = SeededRng::new(3);
        let n = 400;
        let truth = Matrix::from_fn(n, 3, |_, _| rng.gaussian());
        let est = Matrix::from_fn(n, 3, |t, j| truth[(t, j)] + 0.1 * rng.gaussian());
        let base = best_assignment(&truth_scores(&truth, &est), ASSIGNMENT_EXHAUSTIVE);
        assert_eq!(base, vec![Some(0), Some(1), Some(2)]);
        let perm = [2, 0, 1];
        let flipped = Matrix::from_fn(n, 3, |t, j| if j == 1 { -est[(t, perm[j])] } else { est[(t, perm[j])] });
        let moved = best_assignment(&truth_scores(&truth, &flipped), ASSIGNMENT_EXHAUSTIVE);
        for (i, j) in moved.iter().enumerate() {
            assert_eq!(perm[j.unwrap()], base[i].unwrap());
        }
    }

    fn source(features: Vec<f64>) -> SourceRecord {
        SourceRecord { features, truth_person: None, truth_correlation: None, train_label: None, predicted: None }
    }

    fn record(persons: Vec<u32>, sources: Vec<Vec<f64>>) -> TrialRecord {
        TrialRecord {
            scenario: "S".into(),
            environment: "Lab".into(),
            trial: 0,
            seed: 0,
            source_file: None,
            persons,
            split: Split::Train,
            estimated_p_raw: None,
            estimated_p: None,
            p_used: None,
            fill_fraction: None,
            has_truth: false,
            error: None,
            methods: vec![MethodTrialRecord {
                method: "PCA".into(),
                converged: true,
                iterations: 0,
                low_confidence: false,
                error: None,
                sources: sources.into_iter().map(source).collect(),
                evaluations: Vec::new(),
            }],
        }
    }

    /// Feature vector with a person trait in `spectral_entropy`'s slot and
    /// a nuisance value elsewhere.
    fn fv(entropy: f64, trait_: f64, nuisance: f64) -> Vec<f64> {
        let mut f = vec![nuisance; 24];
        f[SPECTRAL_ENTROPY] = entropy;
        f[12] = trait_;
        f
    }

    #[test]
    fn reference_centroid_labels_follow_sources_under_permutation() {
        let mut trials = vec![
            record(vec![1], vec![fv(1.0, 0.6, 0.0), fv(3.0, 2.0, 5.0)]),
            record(vec![1], vec![fv(1.0, 0.62, 0.1)]),
            record(vec![4], vec![fv(1.0, 1.9, 0.2)]),
            record(vec![4], vec![fv(1.0, 1.88, 0.3)]),
            record(vec![1, 4], vec![fv(2.0, 1.85, 9.0), fv(2.0, 0.65, -9.0)]),
            record(vec![1, 4], vec![fv(2.0, 0.61, -9.0), fv(2.0, 1.91, 9.0)]),
        ];
        label_training_sources(&mut trials, 0, LabelingMode::ReferenceCentroid);
        let labels = |t: &TrialRecord| t.methods[0].sources.iter().map(|s| s.train_label).collect::<Vec<_>>();
        assert_eq!(labels(&trials[0]), vec![Some(1), None]);
        assert_eq!(labels(&trials[4]), vec![Some(4), Some(1)]);
        assert_eq!(labels(&trials[5]), vec![Some(1), Some(4)]);
    }

    #[test]
    fn evaluation_without_truth_matches_sets() {
        let mut t = record(vec![2, 3], vec![fv(0.0, 0.0, 0.0), fv(0.0, 1.0, 0.0)]);
        t.split = Split::Test;
        evaluate_trial(&mut t, 0, &Model::Constant(3));
        let ev = &t.methods[0].evaluations;
        assert_eq!(ev.iter().filter(|e| e.correct()).count(), 1);
        assert_eq!(ev[1], PersonEvaluation { person: 3, source: Some(0), predicted: Some(3) });
        assert_eq!(ev[0].source, Some(1));
    }

    #[test]
    fn data_dir_without_trials_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            scenarios: vec![ScenarioConfig { data_dir: Some(dir.path().into()), ..Default::default() }],
            ..Default::default()
        };
        assert!(matches!(plan_trials(&cfg), Err(Error::Config(_))));
    }
}
