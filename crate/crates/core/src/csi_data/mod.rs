//! CSI trial data model, the on-disk trial format and the synthetic
//! multi-person gait mixture generator.

mod io;
pub(crate) mod synth;

pub use io::{load_ground_truth, load_trial, save_ground_truth, save_trial, sidecar_path, truth_path, TrialMeta};
pub use synth::{synthesize, GaitProfile, SynthConfig};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Tensor3};
use crate::scalar::Real;

/// Information-bearing subcarriers per antenna.
pub const SUBCARRIERS: usize = 52;
/// Raw OFDM subcarriers before null/guard removal.
pub const RAW_SUBCARRIERS: usize = 64;
pub const ANTENNAS: usize = 3;
pub const MAX_PERSONS: usize = 10;

/// One walking trial.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiTrial<T> {
    /// Microseconds, strictly increasing.
    pub timestamps_us: Vec<u64>,
    /// time × subcarrier × antenna amplitudes.
    pub amplitudes: Tensor3<T>,
    /// time × antenna flags for rows absent from the capture; their
    /// amplitude slots hold zero until alignment fills them.
    pub missing: Vec<bool>,
    /// Sorted, unique.
    pub person_ids: Vec<u32>,
    pub scenario_id: String,
    pub sample_rate_hz: f64,
}

impl<T: Real> CsiTrial<T> {
    pub fn new(
        timestamps_us: Vec<u64>,
        amplitudes: Tensor3<T>,
        person_ids: Vec<u32>,
        scenario_id: impl Into<String>,
        sample_rate_hz: f64,
    ) -> Result<Self> {
        let [n, _, k] = amplitudes.dims();
        let trial = Self {
            timestamps_us,
            amplitudes,
            missing: vec![false; n * k],
            person_ids,
            scenario_id: scenario_id.into(),
            sample_rate_hz,
        };
        trial.validate()?;
        Ok(trial)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.timestamps_us.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps_us.is_empty()
    }

    pub fn subcarriers(&self) -> usize {
        self.amplitudes.dims()[1]
    }

    pub fn antennas(&self) -> usize {
        self.amplitudes.dims()[2]
    }

    #[inline]
    pub fn is_missing(&self, t: usize, antenna: usize) -> bool {
        self.missing[t * self.antennas() + antenna]
    }

    pub fn has_missing(&self) -> bool {
        self.missing.iter().any(|&m| m)
    }

    pub fn validate(&self) -> Result<()> {
        let [n, m, k] = self.amplitudes.dims();
        if n != self.timestamps_us.len() {
            return Err(Error::Format(format!("{} timestamps for {n} amplitude rows", self.timestamps_us.len())));
        }
        if m != SUBCARRIERS && m != RAW_SUBCARRIERS {
            return Err(Error::Format(format!("{m} subcarriers; expected {SUBCARRIERS} or {RAW_SUBCARRIERS}")));
        }
        if k != ANTENNAS {
            return Err(Error::Format(format!("{k} antennas; expected {ANTENNAS}")));
        }
        if self.missing.len() != n * k {
            return Err(Error::Format("missing-row mask has the wrong length".into()));
        }
        if self.timestamps_us.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Format("timestamps are not strictly increasing".into()));
        }
        if self.amplitudes.as_slice().iter().any(|&x| !x.is_finite() || x < T::zero()) {
            return Err(Error::Format("amplitudes must be finite and nonnegative".into()));
        }
        if self.person_ids.is_empty() || self.person_ids.len() > MAX_PERSONS {
            return Err(Error::Format(format!("{} person labels; expected 1 to {MAX_PERSONS}", self.person_ids.len())));
        }
        if self.person_ids.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Format("person ids must be sorted and unique".into()));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::Format("sample rate must be positive".into()));
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> CsiTrial<U> {
        CsiTrial {
            timestamps_us: self.timestamps_us.clone(),
            amplitudes: self.amplitudes.cast(),
            missing: self.missing.clone(),
            person_ids: self.person_ids.clone(),
            scenario_id: self.scenario_id.clone(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }
}

/// Per-person source signals behind a synthetic trial.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth<T> {
    pub person_ids: Vec<u32>,
    /// n × persons, column order follows `person_ids`.
    pub sources: Matrix<T>,
}
