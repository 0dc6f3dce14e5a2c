//! Wavelet band selection around gait spectral peaks.
//!
//! Each peak in the gait band yields one source: every subcarrier is
//! decomposed, the sub-band containing the peak is kept untouched, the other
//! detail bands are soft-thresholded, and the reconstructions are averaged
//! with weights given by each subcarrier's spectral energy at the peak. The
//! sign of each subcarrier is aligned to the strongest one first so that
//! opposite-phase contributions do not cancel.

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::scalar::Real;
use crate::spectral::{hann, welch};

use super::dwt::{band_edges, noise_sigma, soft_threshold, wavedec, waverec};

/// Peaks weaker than this fraction of the strongest are window sidelobes or noise.
pub const PEAK_FLOOR: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPeak {
    pub freq_hz: f64,
    pub power: f64,
}

/// Spectral peaks of the subcarrier-summed Welch PSD inside `band`, strongest
/// first, at least `min_sep_hz` apart.
pub fn find_peaks<T: Real>(x: &Matrix<T>, rate_hz: f64, band: (f64, f64), min_sep_hz: f64) -> Vec<SpectralPeak> {
    let n = x.rows();
    if n < 4 {
        return Vec::new();
    }
    let seg_len = ((10.0 * rate_hz).round() as usize).clamp(4, n);
    let hop = (seg_len / 2).max(1);
    let count = (n - seg_len) / hop + 1;
    let nfft = seg_len.next_power_of_two() * 4;
    let mut total = vec![0.0f64; nfft / 2 + 1];
    let mut freqs = Vec::new();
    for col in x.columns() {
        let w = welch(&col, rate_hz, seg_len, count, nfft);
        total.iter_mut().zip(&w.psd).for_each(|(t, &p)| *t += p.as_f64());
        freqs = w.freqs;
    }
    let mut cands: Vec<SpectralPeak> = (1..total.len() - 1)
        .filter(|&k| {
            let f = freqs[k].as_f64();
            f >= band.0 && f <= band.1 && total[k] > total[k - 1] && total[k] >= total[k + 1] && total[k] > 0.0
        })
        .map(|k| SpectralPeak { freq_hz: freqs[k].as_f64(), power: total[k] })
        .collect();
    cands.sort_by(|a, b| b.power.total_cmp(&a.power).then(a.freq_hz.total_cmp(&b.freq_hz)));
    let floor = cands.first().map_or(0.0, |c| c.power * PEAK_FLOOR);
    let mut out: Vec<SpectralPeak> = Vec::new();
    for c in cands.into_iter().filter(|c| c.power >= floor) {
        if out.iter().all(|o| (o.freq_hz - c.freq_hz).abs() >= min_sep_hz) {
            out.push(c);
        }
    }
    out
}

/// Hann-windowed DFT coefficient of the mean-removed signal at `freq_hz`.
fn tone_coefficient<T: Real>(signal: &[T], cos: &[f64], sin: &[f64], window: &[f64]) -> (f64, f64) {
    let n = signal.len();
    let mean = signal.iter().map(|v| v.as_f64()).sum::<f64>() / n as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for t in 0..n {
        let v = (signal[t].as_f64() - mean) * window[t];
        re += v * cos[t];
        im -= v * sin[t];
    }
    (re, im)
}

#[derive(Debug, Clone)]
pub struct WaveletFit<T> {
    pub sources: Matrix<T>,
    pub peaks: Vec<SpectralPeak>,
    /// Per-source label of the retained band, e.g. `a4` or `d3`.
    pub kept_bands: Vec<String>,
}

pub fn separate<T: Real>(
    x: &Matrix<T>,
    p: usize,
    rate_hz: f64,
    levels: usize,
    band: (f64, f64),
    min_sep_hz: f64,
) -> Result<WaveletFit<T>> {
    let (n, m) = x.shape();
    let peaks = find_peaks(x, rate_hz, band, min_sep_hz);
    if peaks.len() < p {
        return Err(Error::PeakResolution { found: peaks.len(), requested: p });
    }
    let peaks: Vec<SpectralPeak> = peaks.into_iter().take(p).collect();
    let (detail_bands, approx_band) = band_edges(rate_hz, levels);
    let thr_scale = T::lit((2.0 * (n as f64).ln()).sqrt());

    let decs: Vec<_> = x.columns().iter().map(|c| wavedec(c, levels)).collect::<Result<_>>()?;
    let thresholds: Vec<T> = decs.iter().map(|d| noise_sigma(&d.details[0]) * thr_scale).collect();
    let window: Vec<f64> = hann::<f64>(n);
    let cols = x.columns();

    let mut sources = Matrix::zeros(n, p);
    let mut kept_bands = Vec::with_capacity(p);
    for (i, peak) in peaks.iter().enumerate() {
        let f = peak.freq_hz;
        // the approximation band wins ties at a shared edge
        let keep_approx = f <= approx_band.1;
        let keep_detail = if keep_approx { None } else { detail_bands.iter().position(|&(lo, hi)| f > lo && f <= hi) };
        kept_bands.push(match keep_detail {
            Some(l) => format!("d{}", l + 1),
            None if keep_approx => format!("a{levels}"),
            None => "none".to_string(),
        });

        let omega = std::f64::consts::TAU * f / rate_hz;
        let cos: Vec<f64> = (0..n).map(|t| (omega * t as f64).cos()).collect();
        let sin: Vec<f64> = (0..n).map(|t| (omega * t as f64).sin()).collect();
        let coefs: Vec<(f64, f64)> = cols.iter().map(|c| tone_coefficient(c, &cos, &sin, &window)).collect();
        let energy: Vec<f64> = coefs.iter().map(|(r, i)| r * r + i * i).collect();
        let r = energy.iter().enumerate().fold(0, |b, (j, &e)| if e > energy[b] { j } else { b });
        let total: f64 = energy.iter().sum();
        if !(total > 0.0) {
            continue;
        }
        let mut acc = vec![T::zero(); n];
        for j in 0..m {
            let mut dec = decs[j].clone();
            if !keep_approx {
                dec.approx.iter_mut().for_each(|v| *v = T::zero());
            }
            for (l, d) in dec.details.iter_mut().enumerate() {
                if Some(l) != keep_detail {
                    d.iter_mut().for_each(|v| *v = soft_threshold(*v, thresholds[j]));
                }
            }
            let rec = waverec(&dec);
            let align = coefs[j].0 * coefs[r].0 + coefs[j].1 * coefs[r].1;
            let sign = if align < 0.0 { -1.0 } else { 1.0 };
            let weight = T::lit(sign * energy[j] / total);
            acc.iter_mut().zip(&rec).for_each(|(a, &v)| *a += weight * v);
        }
        sources.set_column(i, &acc);
    }
    Ok(WaveletFit { sources, peaks, kept_bands })
}
