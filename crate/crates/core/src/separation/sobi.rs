//! Second-order blind identification: joint diagonalization of lagged
//! covariances of the whitened data.

use crate::error::{Error, Result};
use crate::numerics::{joint_diagonalize, JointDiagonalization, Matrix};
use crate::scalar::Real;

pub fn default_lags() -> Vec<usize> {
    (0..10).map(|i| 1 + 5 * i).collect()
}

/// Symmetrized lag-τ covariance of the rows of `z` (rows are time).
pub fn lagged_covariance<T: Real>(z: &Matrix<T>, lag: usize) -> Matrix<T> {
    let (n, p) = z.shape();
    let mut r = Matrix::zeros(p, p);
    if lag >= n {
        return r;
    }
    for t in lag..n {
        let (a, b) = (z.row(t), z.row(t - lag));
        for i in 0..p {
            for j in 0..p {
                r[(i, j)] += a[i] * b[j];
            }
        }
    }
    let inv = T::one() / T::from_usize_lossy(n - lag);
    Matrix::from_fn(p, p, |i, j| (r[(i, j)] + r[(j, i)]) * T::lit(0.5) * inv)
}

/// Frobenius floor under which the lagged covariances carry no usable
/// structure for `p` white components over `n` samples.
pub fn confidence_floor<T: Real>(p: usize, n: usize) -> T {
    T::lit(5.0 * (p as f64).sqrt() / (n.max(1) as f64).sqrt())
}

pub(crate) struct SobiFit<T> {
    pub jd: JointDiagonalization<T>,
    pub max_lag_norm: T,
}

/// `segments` are white, time-ordered blocks sharing one coordinate system;
/// their lagged covariances are averaged.
pub(crate) fn fit<T: Real>(segments: &[Matrix<T>], lags: &[usize], max_sweeps: usize, tol: T) -> Result<SobiFit<T>> {
    if lags.is_empty() || lags.contains(&0) {
        return Err(Error::invalid("SOBI lags must be a non-empty set of positive integers"));
    }
    let shortest = segments.iter().map(Matrix::rows).min().unwrap_or(0);
    if let Some(&bad) = lags.iter().find(|&&l| l >= shortest) {
        return Err(Error::invalid(format!("SOBI lag {bad} is not shorter than the {shortest}-sample signal")));
    }
    let inv = T::one() / T::from_usize_lossy(segments.len());
    let mats: Vec<Matrix<T>> = lags
        .iter()
        .map(|&lag| {
            let mut acc = lagged_covariance(&segments[0], lag);
            for s in &segments[1..] {
                let r = lagged_covariance(s, lag);
                acc.as_mut_slice().iter_mut().zip(r.as_slice()).for_each(|(a, &b)| *a += b);
            }
            acc.scale(inv)
        })
        .collect();
    let max_lag_norm = mats.iter().map(Matrix::frobenius_norm).fold(T::zero(), T::max);
    let jd = joint_diagonalize(&mats, max_sweeps, tol)?;
    Ok(SobiFit { jd, max_lag_norm })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_lag_set() {
        assert_eq!(default_lags(), vec![1, 6, 11, 16, 21, 26, 31, 36, 41, 46]);
    }

    #[test]
    fn lagged_covariance_of_sinusoid() {
        let n = 4000;
        let z = Matrix::<f64>::from_fn(n, 1, |t, _| (0.1 * t as f64).sin() * 2f64.sqrt());
        let r = lagged_covariance(&z, 5);
        assert!((r[(0, 0)] - 0.5f64.cos()).abs() < 2e-3);
    }

    #[test]
    fn rejects_long_lags() {
        let z = Matrix::<f64>::zeros(10, 2);
        assert!(fit(std::slice::from_ref(&z), &[10], 10, 1e-8).is_err());
        assert!(fit(&[z], &[0], 10, 1e-8).is_err());
    }
}
