//! Synthetic multi-person gait CSI generator.
//!
//! Each person walks with a cadence in the 0.5–3 Hz gait band. Their body
//! modulates the received amplitude with a three-harmonic waveform under a
//! slow torso-sway envelope at a tenth of the cadence. The modulation reaches
//! each (subcarrier, antenna) channel through a per-antenna path gain, a
//! frequency-selective subcarrier signature and a short multipath filter.
//! White gaussian noise at the requested SNR and a static carrier level
//! complete the amplitude.
//!
//! Person identity (cadence, harmonic mix, sway depth) is fixed by
//! `population_seed` and the person id. Geometry (gains, signatures, phases)
//! and a 1 % cadence drift are redrawn for every trial from `seed`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{CsiTrial, GroundTruth, ANTENNAS, MAX_PERSONS, SUBCARRIERS};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, SeededRng, Tensor3};

pub const MIN_CADENCE_HZ: f64 = 0.5;
pub const MAX_CADENCE_HZ: f64 = 3.0;
/// Samples between successive multipath echoes.
const ECHO_SPACING: usize = 3;
/// Static carrier level as a multiple of the mixture RMS.
const CARRIER_RMS_RATIO: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub persons: usize,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    /// `f64::INFINITY` (JSON `null`) switches the noise off.
    #[serde(with = "snr_serde")]
    pub snr_db: f64,
    pub multipath_taps: usize,
    pub seed: u64,
    /// Identities present; defaults to `0..persons`.
    pub person_ids: Option<Vec<u32>>,
    /// Exact cadences per person, bypassing the population profile and drift.
    pub cadences_hz: Option<Vec<f64>>,
    pub population_seed: u64,
    pub scenario_id: String,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            persons: 2,
            duration_s: 30.0,
            sample_rate_hz: 100.0,
            snr_db: 30.0,
            multipath_taps: 1,
            seed: 0,
            person_ids: None,
            cadences_hz: None,
            population_seed: 2025,
            scenario_id: "synthetic".into(),
        }
    }
}

pub(crate) mod snr_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl SynthConfig {
    pub fn samples(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }

    pub fn resolved_person_ids(&self) -> Vec<u32> {
        self.person_ids.clone().unwrap_or_else(|| (0..self.persons as u32).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_PERSONS).contains(&self.persons) {
            return Err(Error::invalid(format!("persons must be 1 to {MAX_PERSONS}, got {}", self.persons)));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0 && self.duration_s > 0.0) {
            return Err(Error::invalid("duration and sample rate must be positive"));
        }
        if self.samples() < 256 {
            return Err(Error::invalid(format!(
                "duration × rate gives {} samples; at least 256 are needed",
                self.samples()
            )));
        }
        if self.multipath_taps == 0 {
            return Err(Error::invalid("multipath_taps must be at least 1"));
        }
        if self.snr_db.is_nan() {
            return Err(Error::invalid("snr_db is NaN"));
        }
        let ids = self.resolved_person_ids();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if ids.len() != self.persons || sorted.len() != ids.len() {
            return Err(Error::invalid("person_ids must list `persons` distinct ids"));
        }
        if let Some(c) = &self.cadences_hz {
            if c.len() != self.persons || c.iter().any(|f| !(MIN_CADENCE_HZ..=MAX_CADENCE_HZ).contains(f)) {
                return Err(Error::invalid("cadences_hz must give one 0.5–3 Hz cadence per person"));
            }
        }
        Ok(())
    }
}

/// Gait and propagation parameters of one person in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitProfile {
    pub cadence_hz: f64,
    pub harmonic_amps: [f64; 3],
    /// Depth of the torso-sway amplitude modulation.
    pub torso_limb_ratio: f64,
    pub phase: f64,
    pub path_gain_per_antenna: [f64; 3],
    pub subcarrier_signature: Vec<f64>,
}

impl GaitProfile {
    /// Identity traits of `person_id`, stable across trials.
    pub fn identity(population_seed: u64, person_id: u32) -> Self {
        let mut rng = SeededRng::with_stream(population_seed, u64::from(person_id) + 1);
        let slot = f64::from(person_id % MAX_PERSONS as u32);
        let cadence = (0.6 + 0.25 * slot + rng.uniform_range(-0.03, 0.03)).clamp(MIN_CADENCE_HZ, MAX_CADENCE_HZ);
        Self {
            cadence_hz: cadence,
            harmonic_amps: [1.0, rng.uniform_range(0.15, 0.35), rng.uniform_range(0.05, 0.15)],
            torso_limb_ratio: rng.uniform_range(0.2, 0.5),
            phase: 0.0,
            path_gain_per_antenna: [1.0; 3],
            subcarrier_signature: vec![1.0; SUBCARRIERS],
        }
    }

    /// Unit-variance, zero-mean gait waveform sampled at `rate_hz`.
    pub fn waveform(&self, n: usize, rate_hz: f64, harmonic_phases: [f64; 3], sway_phase: f64) -> Vec<f64> {
        let f = self.cadence_hz;
        let mut s: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / rate_hz;
                let env = 1.0 + self.torso_limb_ratio * (TAU * 0.1 * f * t + sway_phase).sin();
                let gait: f64 = (0..3)
                    .map(|h| {
                        let k = (h + 1) as f64;
                        self.harmonic_amps[h] * (TAU * k * f * t + self.phase + harmonic_phases[h]).sin()
                    })
                    .sum();
                env * gait
            })
            .collect();
        let mean = s.iter().sum::<f64>() / n as f64;
        let sd = (s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        s.iter_mut().for_each(|x| *x = (*x - mean) / sd);
        s
    }
}

/// Smooth, essentially nonnegative signature over the subcarrier index: a
/// full-depth ripple of `order` cycles around 1 plus a weak order-0/1 trend.
/// Keeping the gains positive leaves the mixture additive, which the
/// non-negative factorization relies on.
fn subcarrier_signature(order: usize, rng: &mut SeededRng) -> Vec<f64> {
    let phase = rng.uniform_range(0.0, TAU);
    let trend: Vec<f64> = (0..3).map(|_| 0.05 * rng.gaussian()).collect();
    (0..SUBCARRIERS)
        .map(|j| {
            let x = TAU * j as f64 / SUBCARRIERS as f64;
            1.0 + (order as f64 * x + phase).cos() + trend[0] + trend[1] * x.cos() + trend[2] * x.sin()
        })
        .collect()
}

fn multipath_filter(taps: usize, rng: &mut SeededRng) -> Vec<f64> {
    let mut h = vec![1.0];
    for d in 1..taps {
        h.push(rng.uniform_range(-0.5, 0.5) * 0.6_f64.powi(d as i32));
    }
    h
}

fn convolve_echoes(s: &[f64], h: &[f64]) -> Vec<f64> {
    (0..s.len()).map(|t| h.iter().enumerate().map(|(d, &g)| g * s[t.saturating_sub(d * ECHO_SPACING)]).sum()).collect()
}

/// Generates one trial and the per-person ground-truth waveforms (n × persons,
/// columns in ascending person-id order).
pub fn synthesize(cfg: &SynthConfig) -> Result<(CsiTrial<f64>, GroundTruth<f64>)> {
    cfg.validate()?;
    let n = cfg.samples();
    let rate = cfg.sample_rate_hz;
    let mut rng = SeededRng::new(cfg.seed);

    let mut order: Vec<(u32, Option<f64>)> = cfg
        .resolved_person_ids()
        .into_iter()
        .zip((0..cfg.persons).map(|i| cfg.cadences_hz.as_ref().map(|c| c[i])))
        .collect();
    order.sort_by_key(|&(id, _)| id);

    let mut ripple_orders: Vec<usize> = (2..2 + MAX_PERSONS).collect();
    rng.shuffle(&mut ripple_orders);

    let mut truth = Matrix::zeros(n, cfg.persons);
    let mut mixture = Tensor3::<f64>::zeros(n, SUBCARRIERS, ANTENNAS);
    for (p, &(id, fixed_cadence)) in order.iter().enumerate() {
        let mut profile = GaitProfile::identity(cfg.population_seed, id);
        profile.cadence_hz = match fixed_cadence {
            Some(f) => f,
            None => (profile.cadence_hz * (1.0 + 0.01 * rng.gaussian())).clamp(MIN_CADENCE_HZ, MAX_CADENCE_HZ),
        };
        profile.phase = rng.uniform_range(0.0, TAU);
        profile.path_gain_per_antenna = [0; 3].map(|_| rng.uniform_range(0.7, 1.3));
        profile.subcarrier_signature = subcarrier_signature(ripple_orders[p], &mut rng);
        let harmonic_phases = [0; 3].map(|_| rng.uniform_range(-PI, PI));
        let sway_phase = rng.uniform_range(0.0, TAU);

        let source = profile.waveform(n, rate, harmonic_phases, sway_phase);
        truth.set_column(p, &source);
        for a in 0..ANTENNAS {
            let h = multipath_filter(cfg.multipath_taps, &mut rng);
            let echoed = convolve_echoes(&source, &h);
            let gain = profile.path_gain_per_antenna[a];
            for (t, &y) in echoed.iter().enumerate() {
                for (j, &c) in profile.subcarrier_signature.iter().enumerate() {
                    let o = mixture.get(t, j, a);
                    mixture.set(t, j, a, o + gain * c * y);
                }
            }
        }
    }

    let count = mixture.as_slice().len() as f64;
    let signal_power = mixture.as_slice().iter().map(|x| x * x).sum::<f64>() / count;
    if cfg.snr_db.is_finite() {
        let sigma = (signal_power / 10f64.powf(cfg.snr_db / 10.0)).sqrt();
        for x in mixture.as_mut_slice() {
            *x += sigma * rng.gaussian();
        }
    }
    let rms = (mixture.as_slice().iter().map(|x| x * x).sum::<f64>() / count).sqrt();
    let lowest = mixture.as_slice().iter().copied().fold(f64::INFINITY, f64::min);
    let carrier = (CARRIER_RMS_RATIO * rms).max(-lowest);
    for x in mixture.as_mut_slice() {
        *x = (*x + carrier).max(0.0);
    }

    let timestamps: Vec<u64> = (0..n as u64).map(|i| (i as f64 * 1e6 / rate).round() as u64).collect();
    let ids: Vec<u32> = order.iter().map(|&(id, _)| id).collect();
    let trial = CsiTrial::new(timestamps, mixture, ids.clone(), cfg.scenario_id.clone(), rate)?;
    Ok((trial, GroundTruth { person_ids: ids, sources: truth }))
}
