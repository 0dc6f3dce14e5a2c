//! Periodized orthogonal discrete wavelet transform with the 8-tap
//! Daubechies filter.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Daubechies scaling filter with four vanishing moments.
pub const DB4: [f64; 8] = [
    0.23037781330885523,
    0.7148465705525415,
    0.6308807679295904,
    -0.02798376941698385,
    -0.18703481171888114,
    0.030841381835986965,
    0.032883011666982945,
    -0.010597401784997278,
];

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<T> {
    pub approx: Vec<T>,
    /// `details[0]` is the finest level.
    pub details: Vec<Vec<T>>,
    pub original_len: usize,
}

impl<T: Real> Decomposition<T> {
    pub fn levels(&self) -> usize {
        self.details.len()
    }
}

fn filters<T: Real>() -> ([T; 8], [T; 8]) {
    let lo = DB4.map(T::lit);
    let mut hi = [T::zero(); 8];
    for m in 0..8 {
        let v = lo[7 - m];
        hi[m] = if m % 2 == 0 { v } else { -v };
    }
    (lo, hi)
}

fn analysis_step<T: Real>(x: &[T], lo: &[T; 8], hi: &[T; 8]) -> (Vec<T>, Vec<T>) {
    let n = x.len();
    let half = n / 2;
    let mut a = vec![T::zero(); half];
    let mut d = vec![T::zero(); half];
    for k in 0..half {
        for m in 0..8 {
            let v = x[(2 * k + m) % n];
            a[k] += lo[m] * v;
            d[k] += hi[m] * v;
        }
    }
    (a, d)
}

fn synthesis_step<T: Real>(a: &[T], d: &[T], lo: &[T; 8], hi: &[T; 8]) -> Vec<T> {
    let n = a.len() * 2;
    let mut x = vec![T::zero(); n];
    for k in 0..a.len() {
        for m in 0..8 {
            x[(2 * k + m) % n] += lo[m] * a[k] + hi[m] * d[k];
        }
    }
    x
}

/// Multi-level decomposition. The signal is extended by mirroring its tail
/// up to a multiple of `2^levels` so every level halves exactly.
pub fn wavedec<T: Real>(signal: &[T], levels: usize) -> Result<Decomposition<T>> {
    let n = signal.len();
    let block = 1usize << levels;
    if levels == 0 || n < 2 {
        return Err(Error::invalid("wavelet decomposition needs at least one level and two samples"));
    }
    let padded = n.div_ceil(block) * block;
    let mut x = signal.to_vec();
    for i in 0..padded - n {
        // symmetric reflection, wrapping for very short signals
        let back = i % n;
        x.push(signal[n - 1 - back]);
    }
    let (lo, hi) = filters::<T>();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let (a, d) = analysis_step(&x, &lo, &hi);
        details.push(d);
        x = a;
    }
    Ok(Decomposition { approx: x, details, original_len: n })
}

pub fn waverec<T: Real>(dec: &Decomposition<T>) -> Vec<T> {
    let (lo, hi) = filters::<T>();
    let mut x = dec.approx.clone();
    for d in dec.details.iter().rev() {
        x = synthesis_step(&x, d, &lo, &hi);
    }
    x.truncate(dec.original_len);
    x
}

/// Nominal frequency band `[lo, hi]` in Hz of each detail level, finest first,
/// followed by the approximation band.
pub fn band_edges(rate_hz: f64, levels: usize) -> (Vec<(f64, f64)>, (f64, f64)) {
    let details =
        (1..=levels).map(|l| (rate_hz / f64::powi(2.0, l as i32 + 1), rate_hz / f64::powi(2.0, l as i32))).collect();
    (details, (0.0, rate_hz / f64::powi(2.0, levels as i32 + 1)))
}

pub fn soft_threshold<T: Real>(x: T, thr: T) -> T {
    let m = x.abs() - thr;
    if m > T::zero() {
        m * x.signum()
    } else {
        T::zero()
    }
}

/// Median absolute deviation noise estimate from the finest details.
pub fn noise_sigma<T: Real>(finest: &[T]) -> T {
    if finest.is_empty() {
        return T::zero();
    }
    let mut a: Vec<T> = finest.iter().map(|v| v.abs()).collect();
    a.sort_by(|x, y| x.partial_cmp(y).expect("finite coefficients"));
    let k = a.len();
    let med = if k % 2 == 1 { a[k / 2] } else { (a[k / 2 - 1] + a[k / 2]) * T::lit(0.5) };
    med / T::lit(0.6745)
}
