//! The 24-dimensional per-source feature vector: 8 temporal, 8 frequency and
//! 8 spatial descriptors, in a fixed order shared by model files and CSVs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::NormalizedTrial;
use crate::scalar::Real;
use crate::separation::correlation;
use crate::spectral::welch;

pub const FEATURE_DIM: usize = 24;
pub const TEMPORAL_MIN_SAMPLES: usize = 4;
pub const FREQUENCY_MIN_SAMPLES: usize = 64;
pub const SHORT_TIME_SEGMENTS: usize = 8;
pub const ROLLOFF_FRACTION: f64 = 0.85;

pub const FEATURE_NAMES: [&str; FEATURE_DIM] = [
    "mean",
    "std",
    "variance",
    "skewness",
    "kurtosis",
    "zero_crossing_rate",
    "peak_to_peak",
    "rms",
    "spectral_centroid",
    "spectral_spread",
    "spectral_entropy",
    "spectral_flatness",
    "dominant_frequency",
    "spectral_rolloff",
    "spectral_flux",
    "total_power",
    "corr_ant12",
    "corr_ant13",
    "corr_ant23",
    "spatial_variance",
    "diversity_gain",
    "spatial_entropy",
    "mean_pair_corr",
    "max_pair_corr",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector<T> {
    pub values: Vec<T>,
    pub label: Option<u32>,
}

impl<T: Real> FeatureVector<T> {
    pub fn new(temporal: [T; 8], frequency: [T; 8], spatial: [T; 8], label: Option<u32>) -> Self {
        let values = temporal.into_iter().chain(frequency).chain(spatial).collect();
        Self { values, label }
    }

    pub fn temporal(&self) -> &[T] {
        &self.values[0..8]
    }

    pub fn frequency(&self) -> &[T] {
        &self.values[8..16]
    }

    pub fn spatial(&self) -> &[T] {
        &self.values[16..24]
    }

    pub fn get(&self, name: &str) -> Option<T> {
        FEATURE_NAMES.iter().position(|&n| n == name).map(|i| self.values[i])
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// True when the spread of `xs` is indistinguishable from rounding noise.
fn is_constant<T: Real>(xs: &[T], mean: T, sd: T) -> bool {
    let scale = xs.iter().fold(mean.abs(), |m, v| m.max(v.abs()));
    sd <= T::lit(8.0) * T::epsilon() * scale
}

/// mean, std, variance, skewness, excess kurtosis, zero-crossing rate,
/// peak-to-peak, RMS. Std and variance use the n − 1 denominator.
pub fn temporal_features<T: Real>(s: &[T]) -> Result<[T; 8]> {
    let n = s.len();
    if n < TEMPORAL_MIN_SAMPLES {
        return Err(Error::invalid(format!("temporal features need {TEMPORAL_MIN_SAMPLES} samples, got {n}")));
    }
    let nn = T::from_usize_lossy(n);
    let mean = s.iter().copied().sum::<T>() / nn;
    let (mut m2, mut m3, mut m4) = (T::zero(), T::zero(), T::zero());
    for &x in s {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let constant = is_constant(s, mean, (m2 / nn).sqrt());
    let variance = if constant { T::zero() } else { m2 / T::from_usize_lossy(n - 1) };
    let std = variance.sqrt();
    let (m2, m3, m4) = (m2 / nn, m3 / nn, m4 / nn);
    let (skew, kurt) = if constant || !(m2 > T::zero()) {
        (T::zero(), T::zero())
    } else {
        (m3 / (m2 * m2.sqrt()), m4 / (m2 * m2) - T::lit(3.0))
    };
    let zcr = if constant {
        T::zero()
    } else {
        let crossings = s.windows(2).filter(|w| (w[0] - mean >= T::zero()) != (w[1] - mean >= T::zero())).count();
        T::from_usize_lossy(crossings) / T::from_usize_lossy(n - 1)
    };
    let max = s.iter().copied().fold(T::neg_infinity(), T::max);
    let min = s.iter().copied().fold(T::infinity(), T::min);
    let rms = (s.iter().map(|&x| x * x).sum::<T>() / nn).sqrt();
    Ok([mean, std, variance, skew, kurt, zcr, max - min, rms])
}

fn normalized<T: Real>(p: &[T]) -> Option<Vec<T>> {
    let total: T = p.iter().copied().sum();
    (total > T::zero()).then(|| p.iter().map(|&v| v / total).collect())
}

/// Segment length giving `SHORT_TIME_SEGMENTS` half-overlapping segments.
fn segment_length(n: usize) -> usize {
    (2 * n / (SHORT_TIME_SEGMENTS + 1)).max(2)
}

/// centroid, spread, entropy (bits), flatness, dominant frequency, 85 %
/// rolloff, flux, total power; from a Welch estimate over eight
/// half-overlapping Hann segments. The DC bin is excluded.
pub fn frequency_features<T: Real>(s: &[T], rate_hz: f64) -> Result<[T; 8]> {
    let n = s.len();
    if n < FREQUENCY_MIN_SAMPLES {
        return Err(Error::invalid(format!("frequency features need {FREQUENCY_MIN_SAMPLES} samples, got {n}")));
    }
    if !(rate_hz > 0.0) {
        return Err(Error::invalid("sample rate must be positive"));
    }
    let mean = s.iter().copied().sum::<T>() / T::from_usize_lossy(n);
    let sd = (s.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / T::from_usize_lossy(n)).sqrt();
    let flat = [T::zero(), T::zero(), T::zero(), T::one(), T::zero(), T::zero(), T::zero(), T::zero()];
    if is_constant(s, mean, sd) {
        return Ok(flat);
    }
    let nfft = n.next_power_of_two();
    let w = welch(s, rate_hz, segment_length(n), SHORT_TIME_SEGMENTS, nfft);
    let freqs = &w.freqs[1..];
    let psd = &w.psd[1..];
    let total: T = psd.iter().copied().sum();
    let Some(p) = normalized(psd) else {
        return Ok(flat);
    };

    let centroid: T = freqs.iter().zip(&p).map(|(&f, &q)| f * q).sum();
    let spread = freqs.iter().zip(&p).map(|(&f, &q)| (f - centroid) * (f - centroid) * q).sum::<T>().sqrt();
    let entropy = -p.iter().filter(|&&q| q > T::zero()).map(|&q| q * q.log2()).sum::<T>();
    let tiny = T::min_positive_value();
    let log_mean = psd.iter().map(|&v| (v + tiny).ln()).sum::<T>() / T::from_usize_lossy(psd.len());
    let arith = total / T::from_usize_lossy(psd.len());
    let flatness = (log_mean.exp() / arith).min(T::one());
    let dominant = freqs[crate::spectral::argmax(psd)];
    let mut acc = T::zero();
    let target = T::lit(ROLLOFF_FRACTION);
    let mut rolloff = *freqs.last().expect("non-empty spectrum");
    for (&f, &q) in freqs.iter().zip(&p) {
        acc += q;
        if acc >= target {
            rolloff = f;
            break;
        }
    }
    let short: Vec<Option<Vec<T>>> = w.segments.iter().map(|seg| normalized(&seg[1..])).collect();
    let flux = if short.len() < 2 {
        T::zero()
    } else {
        let diffs: Vec<T> = short
            .windows(2)
            .map(|pair| match (&pair[0], &pair[1]) {
                (Some(a), Some(b)) => a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt(),
                _ => T::zero(),
            })
            .collect();
        diffs.iter().copied().sum::<T>() / T::from_usize_lossy(diffs.len())
    };
    Ok([centroid, spread, entropy, flatness, dominant, rolloff, flux, total])
}

/// 3 antenna-pair correlations, variance of the source's antenna signature
/// g, diversity gain max|g|/mean|g|, entropy (bits) of |g|/Σ|g|, mean and max
/// pairwise correlation. `antennas` holds one series per antenna.
pub fn spatial_features<T: Real>(s: &[T], antennas: &[Vec<T>]) -> Result<[T; 8]> {
    if antennas.len() != 3 {
        return Err(Error::invalid(format!("spatial features need 3 antenna series, got {}", antennas.len())));
    }
    if antennas.iter().any(|a| a.len() != s.len()) {
        return Err(Error::invalid("antenna series length differs from the source length"));
    }
    let g: Vec<T> = antennas.iter().map(|a| correlation(s, a)).collect();
    let pairs = [
        correlation(&antennas[0], &antennas[1]),
        correlation(&antennas[0], &antennas[2]),
        correlation(&antennas[1], &antennas[2]),
    ];
    let three = T::lit(3.0);
    let g_mean = g.iter().copied().sum::<T>() / three;
    let g_var = g.iter().map(|&v| (v - g_mean) * (v - g_mean)).sum::<T>() / T::lit(2.0);
    let abs: Vec<T> = g.iter().map(|v| v.abs()).collect();
    let abs_sum: T = abs.iter().copied().sum();
    let (gain, entropy) = if abs_sum > T::zero() {
        let max = abs.iter().copied().fold(T::zero(), T::max);
        let h = -abs.iter().map(|&a| a / abs_sum).filter(|&q| q > T::zero()).map(|q| q * q.log2()).sum::<T>();
        (max / (abs_sum / three), h)
    } else {
        (T::one(), T::zero())
    };
    let pair_mean = pairs.iter().copied().sum::<T>() / three;
    let pair_max = pairs.iter().copied().fold(T::neg_infinity(), T::max);
    Ok([pairs[0], pairs[1], pairs[2], g_var, gain, entropy, pair_mean, pair_max])
}

pub fn extract<T: Real>(s: &[T], antennas: &[Vec<T>], rate_hz: f64, label: Option<u32>) -> Result<FeatureVector<T>> {
    Ok(FeatureVector::new(
        temporal_features(s)?,
        frequency_features(s, rate_hz)?,
        spatial_features(s, antennas)?,
        label,
    ))
}

/// Convenience wrapper taking the antenna series from a normalized trial.
pub fn extract_from_trial<T: Real>(
    s: &[T],
    trial: &NormalizedTrial<T>,
    label: Option<u32>,
) -> Result<FeatureVector<T>> {
    extract(s, &trial.antenna_series(), trial.sample_rate_hz, label)
}
