//! Person-count estimation from the covariance eigenvalue energy curve:
//! the estimate is the smallest `k` whose leading eigenvalues hold at least
//! `threshold` of the total variance.

use serde::{Deserialize, Serialize};

use crate::csi_data::MAX_PERSONS;
use crate::error::{Error, Result};
use crate::numerics::{sym_eig, Matrix};
use crate::preprocess::NormalizedTrial;
use crate::scalar::Real;

pub const DEFAULT_ENERGY_THRESHOLD: f64 = 0.95;

/// How the antenna axis is reduced before forming the 52×52 covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AntennaReduction {
    #[default]
    Average,
    Stack,
}

impl AntennaReduction {
    pub fn apply<T: Real>(self, norm: &NormalizedTrial<T>) -> Matrix<T> {
        match self {
            AntennaReduction::Average => norm.antenna_averaged(),
            AntennaReduction::Stack => norm.antenna_stacked(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CountEstimate<T> {
    pub raw: usize,
    /// `raw` clamped to 1..=10 for the separation stage.
    pub clamped: usize,
    pub eigenvalues: Vec<T>,
    pub energy_curve: Vec<T>,
    /// Set when fewer samples than subcarriers were available.
    pub underdetermined: bool,
}

/// Cumulative normalized eigen-energy; the last entry is exactly 1.
pub fn energy_curve<T: Real>(eigenvalues: &[T]) -> Result<Vec<T>> {
    let clipped: Vec<T> = eigenvalues.iter().map(|&l| l.max(T::zero())).collect();
    let total: T = clipped.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(Error::DegenerateInput("all covariance eigenvalues are zero".into()));
    }
    let mut acc = T::zero();
    let mut curve: Vec<T> = clipped
        .iter()
        .map(|&l| {
            acc += l;
            (acc / total).min(T::one())
        })
        .collect();
    if let Some(last) = curve.last_mut() {
        *last = T::one();
    }
    Ok(curve)
}

/// Smallest `k` (1-based) with `curve[k-1] ≥ threshold`.
pub fn count_from_curve<T: Real>(curve: &[T], threshold: T) -> usize {
    // ratios that miss the threshold by rounding alone still count
    let slack = T::epsilon() * T::lit(16.0);
    curve.iter().position(|&c| c >= threshold - slack).map_or(curve.len(), |i| i + 1)
}

pub fn count_from_spectrum<T: Real>(eigenvalues: &[T], threshold: T) -> Result<usize> {
    Ok(count_from_curve(&energy_curve(eigenvalues)?, threshold))
}

pub fn estimate_count<T: Real>(
    norm: &NormalizedTrial<T>,
    threshold: T,
    reduction: AntennaReduction,
) -> Result<CountEstimate<T>> {
    if !(threshold > T::zero() && threshold <= T::one()) {
        return Err(Error::invalid("energy threshold must lie in (0, 1]"));
    }
    let x = reduction.apply(norm);
    let cov = x.gram_scaled();
    let eig = sym_eig(&cov)?;
    let curve = energy_curve(&eig.values)?;
    let raw = count_from_curve(&curve, threshold);
    Ok(CountEstimate {
        raw,
        clamped: raw.clamp(1, MAX_PERSONS),
        eigenvalues: eig.values,
        energy_curve: curve,
        underdetermined: x.rows() < x.cols(),
    })
}
