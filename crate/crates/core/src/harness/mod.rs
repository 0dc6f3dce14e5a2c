//! Experiment orchestration: scenario generation, the per-trial pipeline
//! (preprocess → enumerate → separate → features → classify) and report
//! emission.
//!
//! The harness works in `f64`; the numerical modules underneath stay generic.

mod pipeline;
mod report;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use pipeline::{run_experiment, MethodTrialRecord, PersonEvaluation, RunResult, SourceRecord, Split, TrialRecord};
pub use report::{aggregate, emit_report, load_run_result, save_run_result, ReportFiles};

use crate::classifier::SvmParams;
use crate::csi_data::synth::snr_serde;
use crate::csi_data::MAX_PERSONS;
use crate::diagnostics::Averaging;
use crate::enumeration::{AntennaReduction, DEFAULT_ENERGY_THRESHOLD};
use crate::error::{Error, Result};
use crate::preprocess::DEFAULT_DROPPED_SUBCARRIERS;
use crate::separation::{Method, SeparationOptions};

pub const MIN_TRIALS: usize = 4;

/// Where the number of sources handed to separation comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PersonCountMode {
    #[default]
    Estimated,
    GroundTruth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingScope {
    /// One classifier per method over every scenario's training trials.
    Global,
    #[default]
    PerScenario,
}

/// How separated sources of multi-person training trials get identity labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelingMode {
    /// Nearest single-person reference centroid, one-to-one.
    #[default]
    ReferenceCentroid,
    /// Best correlation against the synthetic ground-truth sources.
    GroundTruth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub id: String,
    pub environment: String,
    pub persons: usize,
    pub trials: usize,
    /// Identity pool. Trial i walks `persons` consecutive pool entries
    /// starting at i·persons (wrapping). Defaults to `0..persons`.
    pub participants: Option<Vec<u32>>,
    #[serde(with = "snr_serde")]
    pub snr_db: f64,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub multipath_taps: usize,
    /// Load trials from `*.csv` files here instead of synthesizing them.
    pub data_dir: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            id: "S".into(),
            environment: "Lab".into(),
            persons: 2,
            trials: 20,
            participants: None,
            snr_db: 30.0,
            duration_s: 30.0,
            sample_rate_hz: 100.0,
            multipath_taps: 1,
            data_dir: None,
        }
    }
}

impl ScenarioConfig {
    pub fn pool(&self) -> Vec<u32> {
        self.participants.clone().unwrap_or_else(|| (0..self.persons as u32).collect())
    }

    /// Sorted identities walking in synthetic trial `i`.
    pub fn trial_persons(&self, i: usize) -> Vec<u32> {
        let pool = self.pool();
        let mut ids: Vec<u32> = (0..self.persons).map(|j| pool[(i * self.persons + j) % pool.len()]).collect();
        ids.sort_unstable();
        ids
    }
}

fn methods_de<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Method>, D::Error> {
    Vec::<String>::deserialize(d)?.iter().map(|s| s.parse().map_err(serde::de::Error::custom)).collect()
}

fn methods_ser<S: Serializer>(m: &[Method], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(m.iter().map(|m| m.name()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub scenarios: Vec<ScenarioConfig>,
    #[serde(deserialize_with = "methods_de", serialize_with = "methods_ser")]
    pub methods: Vec<Method>,
    pub person_count_mode: PersonCountMode,
    pub train_fraction: f64,
    pub training_scope: TrainingScope,
    pub labeling: LabelingMode,
    pub population_seed: u64,
    pub energy_threshold: f64,
    pub count_reduction: AntennaReduction,
    /// Only applied to 64-subcarrier input.
    pub dropped_subcarriers: Vec<usize>,
    /// `None` resamples to each trial's median rate.
    pub target_rate_hz: Option<f64>,
    pub separation: SeparationOptions,
    pub svm: SvmParams,
    pub averaging: Averaging,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            scenarios: default_scenarios(),
            methods: Method::ALL.to_vec(),
            person_count_mode: PersonCountMode::Estimated,
            train_fraction: 0.7,
            training_scope: TrainingScope::PerScenario,
            labeling: LabelingMode::ReferenceCentroid,
            population_seed: 2025,
            energy_threshold: DEFAULT_ENERGY_THRESHOLD,
            count_reduction: AntennaReduction::Average,
            dropped_subcarriers: DEFAULT_DROPPED_SUBCARRIERS.to_vec(),
            target_rate_hz: None,
            separation: SeparationOptions::default(),
            svm: SvmParams::default(),
            averaging: Averaging::Macro,
            output_dir: None,
        }
    }
}

/// Seven scenarios over two environments: a single-person reference set,
/// an easy 2-person regime (distinct cadences, high SNR), 5-person and
/// 10-person crowds, ending in a noisy 10-person classroom.
pub fn default_scenarios() -> Vec<ScenarioConfig> {
    let all: Vec<u32> = (0..MAX_PERSONS as u32).collect();
    let s = |id: &str, env: &str, persons: usize, trials: usize, pool: Vec<u32>, snr: f64| ScenarioConfig {
        id: id.into(),
        environment: env.into(),
        persons,
        trials,
        participants: Some(pool),
        snr_db: snr,
        ..ScenarioConfig::default()
    };
    vec![
        s("A", "Lab", 1, 30, all.clone(), 30.0),
        s("B", "Lab", 2, 20, vec![0, 5], 30.0),
        s("C", "Classroom", 2, 16, vec![2, 7], 20.0),
        s("D", "Lab", 5, 12, vec![0, 2, 4, 6, 8], 20.0),
        s("E", "Classroom", 5, 12, vec![1, 3, 5, 7, 9], 15.0),
        s("F", "Lab", 10, 10, all.clone(), 15.0),
        s("G", "Classroom", 10, 10, all, 0.0),
    ]
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.scenarios.is_empty() {
            return bad("no scenarios configured".into());
        }
        if self.methods.is_empty() {
            return bad("no separation methods configured".into());
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return bad("methods are listed more than once".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!("train_fraction must lie in (0, 1), got {}", self.train_fraction));
        }
        if !(self.energy_threshold > 0.0 && self.energy_threshold <= 1.0) {
            return bad(format!("energy_threshold must lie in (0, 1], got {}", self.energy_threshold));
        }
        let mut ids: Vec<&str> = Vec::new();
        for s in &self.scenarios {
            if ids.contains(&s.id.as_str()) {
                return bad(format!("duplicate scenario id '{}'", s.id));
            }
            ids.push(&s.id);
            if s.id.is_empty() || s.id.contains(',') || s.environment.is_empty() || s.environment.contains(',') {
                return bad("scenario ids and environments must be non-empty and comma-free".into());
            }
            if s.data_dir.is_some() {
                continue;
            }
            if s.trials < MIN_TRIALS {
                return bad(format!("scenario '{}' has {} trials; at least {MIN_TRIALS} are needed", s.id, s.trials));
            }
            if !(1..=MAX_PERSONS).contains(&s.persons) {
                return bad(format!("scenario '{}': persons must be 1 to {MAX_PERSONS}", s.id));
            }
            let pool = s.pool();
            let mut uniq = pool.clone();
            uniq.sort_unstable();
            uniq.dedup();
            if uniq.len() != pool.len() || pool.len() < s.persons {
                return bad(format!("scenario '{}': participants must hold at least `persons` distinct ids", s.id));
            }
        }
        Ok(())
    }
}
