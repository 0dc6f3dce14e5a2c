//! Subcarrier filtering, temporal alignment with gap filling, and
//! per-channel z-score normalization.

use crate::csi_data::{CsiTrial, RAW_SUBCARRIERS, SUBCARRIERS};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Tensor3};
use crate::scalar::Real;

/// Null and guard subcarriers of a 64-bin capture: 6 low guard, DC, 5 high guard.
pub const DEFAULT_DROPPED_SUBCARRIERS: [usize; 12] = [0, 1, 2, 3, 4, 5, 32, 59, 60, 61, 62, 63];

/// Largest tolerated fraction of gap-filled (sample, antenna) slots.
pub const MAX_FILL_FRACTION: f64 = 0.10;

/// Keeps the 52 information-bearing subcarriers.
pub fn filter_subcarriers<T: Real>(raw: &Tensor3<T>, dropped: &[usize]) -> Result<Tensor3<T>> {
    let [n, m, k] = raw.dims();
    match m {
        SUBCARRIERS => Ok(raw.clone()),
        RAW_SUBCARRIERS => {
            let keep: Vec<usize> = (0..m).filter(|j| !dropped.contains(j)).collect();
            if keep.len() != SUBCARRIERS {
                return Err(Error::invalid(format!(
                    "drop set leaves {} subcarriers, expected {SUBCARRIERS}",
                    keep.len()
                )));
            }
            Ok(Tensor3::from_fn([n, SUBCARRIERS, k], |t, j, a| raw.get(t, keep[j], a)))
        }
        other => Err(Error::invalid(format!("{other} subcarriers; expected {SUBCARRIERS} or {RAW_SUBCARRIERS}"))),
    }
}

/// Applies [`filter_subcarriers`] to a whole trial.
pub fn filter_trial<T: Real>(trial: &CsiTrial<T>, dropped: &[usize]) -> Result<CsiTrial<T>> {
    Ok(CsiTrial { amplitudes: filter_subcarriers(&trial.amplitudes, dropped)?, ..trial.clone() })
}

/// Z-scored trial, statistics kept per (subcarrier, antenna) channel.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedTrial<T> {
    pub tensor: Tensor3<T>,
    /// subcarrier × antenna channel means.
    pub means: Matrix<T>,
    /// subcarrier × antenna population standard deviations; 0 marks a dead channel.
    pub stds: Matrix<T>,
    pub sample_rate_hz: f64,
    pub person_ids: Vec<u32>,
    pub scenario_id: String,
}

impl<T: Real> NormalizedTrial<T> {
    pub fn len(&self) -> usize {
        self.tensor.dims()[0]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// n × 52 matrix averaged across antennas.
    pub fn antenna_averaged(&self) -> Matrix<T> {
        self.tensor.mean_over_last()
    }

    /// (n·3) × 52 matrix with antenna rows stacked.
    pub fn antenna_stacked(&self) -> Matrix<T> {
        self.tensor.stack_last_as_rows()
    }

    /// Mean amplitude across subcarriers for each antenna, as n-length series.
    pub fn antenna_series(&self) -> Vec<Vec<T>> {
        let [n, m, k] = self.tensor.dims();
        let inv = T::one() / T::from_usize_lossy(m);
        (0..k).map(|a| (0..n).map(|t| (0..m).map(|j| self.tensor.get(t, j, a)).sum::<T>() * inv).collect()).collect()
    }
}

/// Population mean and standard deviation.
pub(crate) fn mean_std<T: Real>(xs: &[T]) -> (T, T) {
    let n = T::from_usize_lossy(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    let var = xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / n;
    (mean, var.sqrt())
}

fn zscore_tensor<T: Real>(x: &Tensor3<T>) -> (Tensor3<T>, Matrix<T>, Matrix<T>) {
    let [_, m, k] = x.dims();
    let mut out = x.clone();
    let mut means = Matrix::zeros(m, k);
    let mut stds = Matrix::zeros(m, k);
    for j in 0..m {
        for a in 0..k {
            let series = x.fiber(j, a);
            let (mu, sd) = mean_std(&series);
            // a channel whose spread is pure rounding noise is treated as constant
            let spread_floor = T::epsilon() * T::lit(8.0) * mu.abs();
            let normalized: Vec<T> = if sd > spread_floor && sd > T::zero() {
                series.iter().map(|&v| (v - mu) / sd).collect()
            } else {
                vec![T::zero(); series.len()]
            };
            let sd = if sd > spread_floor { sd } else { T::zero() };
            out.set_fiber(j, a, &normalized);
            means[(j, a)] = mu;
            stds[(j, a)] = sd;
        }
    }
    (out, means, stds)
}

/// Per-channel z-score with population standard deviation. Constant channels
/// map to zeros and record a standard deviation of 0.
pub fn zscore<T: Real>(trial: &CsiTrial<T>) -> Result<NormalizedTrial<T>> {
    if trial.len() < 2 {
        return Err(Error::invalid(format!("z-scoring needs at least 2 samples, got {}", trial.len())));
    }
    if trial.has_missing() {
        return Err(Error::invalid("trial has missing antenna rows; align it first"));
    }
    let (tensor, means, stds) = zscore_tensor(&trial.amplitudes);
    Ok(NormalizedTrial {
        tensor,
        means,
        stds,
        sample_rate_hz: trial.sample_rate_hz,
        person_ids: trial.person_ids.clone(),
        scenario_id: trial.scenario_id.clone(),
    })
}

/// Median of the instantaneous rates `1e6 / Δt`.
pub fn default_target_rate<T: Real>(trial: &CsiTrial<T>) -> Result<f64> {
    if trial.len() < 2 {
        return Err(Error::invalid("rate estimation needs at least 2 samples"));
    }
    let mut rates: Vec<f64> = trial.timestamps_us.windows(2).map(|w| 1e6 / (w[1] - w[0]) as f64).collect();
    rates.sort_by(|a, b| a.partial_cmp(b).expect("finite rates"));
    let mid = rates.len() / 2;
    Ok(if rates.len() % 2 == 1 { rates[mid] } else { 0.5 * (rates[mid - 1] + rates[mid]) })
}

#[derive(Debug, Clone)]
pub struct Aligned<T> {
    pub trial: CsiTrial<T>,
    /// Fraction of (sample, antenna) slots filled from neighbours.
    pub fill_fraction: f64,
}

/// Resamples onto a uniform grid at `target_rate_hz` spanning the input
/// range. Each grid point copies the nearest input row (earlier row on ties);
/// antennas absent from that row are forward-filled, then leading gaps are
/// back-filled.
pub fn align<T: Real>(trial: &CsiTrial<T>, target_rate_hz: f64) -> Result<Aligned<T>> {
    if trial.len() < 2 {
        return Err(Error::invalid(format!("alignment needs at least 2 samples, got {}", trial.len())));
    }
    if !(target_rate_hz.is_finite() && target_rate_hz > 0.0) {
        return Err(Error::invalid("target rate must be positive"));
    }
    let [_, m, k] = trial.amplitudes.dims();
    let ts = &trial.timestamps_us;
    let (start, end) = (ts[0], *ts.last().expect("nonempty"));
    let step = 1e6 / target_rate_hz;
    let count = ((end - start) as f64 / step + 1e-9).floor() as usize + 1;
    let grid: Vec<u64> = (0..count).map(|i| start + (i as f64 * step).round() as u64).collect();

    let mut amplitudes = Tensor3::zeros(count, m, k);
    let mut filled = vec![false; count * k];
    let mut cursor = 0usize;
    for (g, &t) in grid.iter().enumerate() {
        while cursor + 1 < ts.len() && ts[cursor + 1] <= t {
            cursor += 1;
        }
        let src = if cursor + 1 < ts.len() && ts[cursor + 1] - t < t.saturating_sub(ts[cursor]) {
            cursor + 1
        } else {
            cursor
        };
        for a in 0..k {
            if trial.is_missing(src, a) {
                filled[g * k + a] = true;
            } else {
                for j in 0..m {
                    amplitudes.set(g, j, a, trial.amplitudes.get(src, j, a));
                }
            }
        }
    }

    for a in 0..k {
        let mut last: Option<usize> = None;
        for g in 0..count {
            if filled[g * k + a] {
                if let Some(prev) = last {
                    for j in 0..m {
                        amplitudes.set(g, j, a, amplitudes.get(prev, j, a));
                    }
                }
            } else {
                last = Some(g);
            }
        }
        let first_real = (0..count).find(|&g| !filled[g * k + a]);
        match first_real {
            Some(f) => {
                for g in 0..f {
                    for j in 0..m {
                        amplitudes.set(g, j, a, amplitudes.get(f, j, a));
                    }
                }
            }
            None => return Err(Error::DataQuality { filled: 100.0, limit: MAX_FILL_FRACTION * 100.0 }),
        }
    }

    let fill_fraction = filled.iter().filter(|&&f| f).count() as f64 / filled.len() as f64;
    if fill_fraction > MAX_FILL_FRACTION {
        return Err(Error::DataQuality { filled: fill_fraction * 100.0, limit: MAX_FILL_FRACTION * 100.0 });
    }
    let out = CsiTrial {
        timestamps_us: grid,
        amplitudes,
        missing: vec![false; count * k],
        person_ids: trial.person_ids.clone(),
        scenario_id: trial.scenario_id.clone(),
        sample_rate_hz: target_rate_hz,
    };
    Ok(Aligned { trial: out, fill_fraction })
}

/// Filter → align → z-score. `target_rate_hz = None` uses the median rate.
pub fn preprocess<T: Real>(
    trial: &CsiTrial<T>,
    dropped: &[usize],
    target_rate_hz: Option<f64>,
) -> Result<(NormalizedTrial<T>, f64)> {
    let filtered = filter_trial(trial, dropped)?;
    let rate = match target_rate_hz {
        Some(r) => r,
        None => default_target_rate(&filtered)?,
    };
    let aligned = align(&filtered, rate)?;
    Ok((zscore(&aligned.trial)?, aligned.fill_fraction))
}
