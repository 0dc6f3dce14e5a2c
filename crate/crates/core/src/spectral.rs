//! Hann-windowed power spectra and Welch averaging.

use crate::scalar::Real;

/// Symmetric Hann window.
pub fn hann<T: Real>(len: usize) -> Vec<T> {
    if len <= 1 {
        return vec![T::one(); len];
    }
    let denom = T::from_usize_lossy(len - 1);
    (0..len).map(|i| T::lit(0.5) * (T::one() - (T::TAU() * T::from_usize_lossy(i) / denom).cos())).collect()
}

/// One-sided power spectrum of a Hann-windowed segment zero-padded to
/// `nfft`, scaled so the bins sum to the segment's windowed mean square.
pub fn segment_power<T: Real>(segment: &[T], window: &[T], nfft: usize) -> Vec<T> {
    let windowed: Vec<T> = segment.iter().zip(window).map(|(&x, &w)| x * w).collect();
    let spec = T::fft_real(&windowed, nfft);
    let wss: T = window.iter().map(|&w| w * w).sum();
    let norm = T::from_usize_lossy(nfft) * wss;
    let half = nfft / 2;
    (0..=half)
        .map(|k| {
            let p = spec[k].norm_sqr() / norm;
            if k == 0 || (nfft % 2 == 0 && k == half) {
                p
            } else {
                p + p
            }
        })
        .collect()
}

/// Bin center frequencies for an `nfft`-point one-sided spectrum.
pub fn bin_frequencies<T: Real>(nfft: usize, rate_hz: f64) -> Vec<T> {
    (0..=nfft / 2).map(|k| T::lit(k as f64 * rate_hz / nfft as f64)).collect()
}

#[derive(Debug, Clone)]
pub struct Welch<T> {
    pub freqs: Vec<T>,
    /// Averaged one-sided power.
    pub psd: Vec<T>,
    /// Per-segment one-sided power, in time order.
    pub segments: Vec<Vec<T>>,
}

/// Welch estimate over `count` Hann segments of `seg_len` samples with 50 %
/// overlap, centred in the signal. The signal mean is removed first.
pub fn welch<T: Real>(signal: &[T], rate_hz: f64, seg_len: usize, count: usize, nfft: usize) -> Welch<T> {
    let n = signal.len();
    let seg_len = seg_len.clamp(1, n.max(1));
    let hop = (seg_len / 2).max(1);
    let count = count.max(1);
    let span = seg_len + hop * (count - 1);
    let (count, start) = if span <= n { (count, (n - span) / 2) } else { (((n - seg_len) / hop) + 1, 0) };

    let mean = signal.iter().copied().sum::<T>() / T::from_usize_lossy(n.max(1));
    let centred: Vec<T> = signal.iter().map(|&x| x - mean).collect();
    let window = hann::<T>(seg_len);
    let segments: Vec<Vec<T>> = (0..count)
        .map(|s| {
            let at = start + s * hop;
            segment_power(&centred[at..at + seg_len], &window, nfft)
        })
        .collect();
    let bins = nfft / 2 + 1;
    let inv = T::one() / T::from_usize_lossy(segments.len());
    let psd = (0..bins).map(|k| segments.iter().map(|s| s[k]).sum::<T>() * inv).collect();
    Welch { freqs: bin_frequencies(nfft, rate_hz), psd, segments }
}

/// Single Hann-windowed periodogram over the whole mean-removed signal.
pub fn periodogram<T: Real>(signal: &[T], rate_hz: f64, nfft: usize) -> (Vec<T>, Vec<T>) {
    let n = signal.len();
    let mean = signal.iter().copied().sum::<T>() / T::from_usize_lossy(n.max(1));
    let centred: Vec<T> = signal.iter().map(|&x| x - mean).collect();
    (bin_frequencies(nfft, rate_hz), segment_power(&centred, &hann(n), nfft))
}

/// Index of the largest value; first index wins ties.
pub fn argmax<T: Real>(xs: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parseval_scaling() {
        let n = 512;
        let x: Vec<f64> = (0..n).map(|i| (0.37 * i as f64).sin() + 0.3 * (1.9 * i as f64).cos()).collect();
        let w = vec![1.0; n];
        let p = segment_power(&x, &w, 1024);
        let ms = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
        assert!((p.iter().sum::<f64>() - ms).abs() < 1e-10);
    }

    #[test]
    fn tone_peak_location() {
        let rate = 100.0;
        let x: Vec<f64> = (0..2048).map(|i| (std::f64::consts::TAU * 2.0 * i as f64 / rate).sin()).collect();
        let w = welch(&x, rate, 455, 8, 2048);
        let f = w.freqs[argmax(&w.psd)];
        assert!((f - 2.0).abs() <= rate / 2048.0);
        assert_eq!(w.segments.len(), 8);
    }

    #[test]
    fn hann_is_symmetric() {
        let w = hann::<f64>(9);
        for i in 0..9 {
            assert!((w[i] - w[8 - i]).abs() < 1e-15);
        }
        assert_eq!(w[0], 0.0);
        assert!((w[4] - 1.0).abs() < 1e-15);
    }
}
