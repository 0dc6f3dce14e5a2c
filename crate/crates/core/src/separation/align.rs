//! Resolves the permutation and sign ambiguity of separated sources against
//! reference signals.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::scalar::Real;

pub const EXHAUSTIVE_LIMIT: usize = 6;

/// Pearson correlation; zero when either series is constant.
pub fn correlation<T: Real>(a: &[T], b: &[T]) -> T {
    let n = T::from_usize_lossy(a.len().max(1));
    let ma = a.iter().copied().sum::<T>() / n;
    let mb = b.iter().copied().sum::<T>() / n;
    let (mut sab, mut saa, mut sbb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa > T::zero() && sbb > T::zero() {
        (sab / (saa * sbb).sqrt()).max(-T::one()).min(T::one())
    } else {
        T::zero()
    }
}

/// Correlation of every column of `a` (rows of the result) with every column of `b`.
pub fn cross_correlation<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let ac = a.columns();
    let bc = b.columns();
    Matrix::from_fn(ac.len(), bc.len(), |i, j| correlation(&ac[i], &bc[j]))
}

/// One-to-one assignment of rows to columns maximizing the summed score.
/// Exhaustive when the smaller side has at most `exhaustive_limit` entries,
/// otherwise greedy on the best remaining pair. Rows left over map to `None`.
pub fn best_assignment<T: Real>(scores: &Matrix<T>, exhaustive_limit: usize) -> Vec<Option<usize>> {
    let (r, c) = scores.shape();
    let k = r.min(c);
    if k == 0 {
        return vec![None; r];
    }
    if k <= exhaustive_limit {
        let mut best_total = T::neg_infinity();
        let mut best = vec![None; r];
        if r <= c {
            for perm in (0..c).permutations(r) {
                let total: T = perm.iter().enumerate().map(|(i, &j)| scores[(i, j)]).sum();
                if total > best_total {
                    best_total = total;
                    best = perm.into_iter().map(Some).collect();
                }
            }
        } else {
            for perm in (0..r).permutations(c) {
                let total: T = perm.iter().enumerate().map(|(j, &i)| scores[(i, j)]).sum();
                if total > best_total {
                    best_total = total;
                    best = vec![None; r];
                    for (j, &i) in perm.iter().enumerate() {
                        best[i] = Some(j);
                    }
                }
            }
        }
        return best;
    }
    let mut out = vec![None; r];
    let mut row_used = vec![false; r];
    let mut col_used = vec![false; c];
    for _ in 0..k {
        let mut pick: Option<(usize, usize)> = None;
        for i in (0..r).filter(|&i| !row_used[i]) {
            for j in (0..c).filter(|&j| !col_used[j]) {
                if pick.is_none_or(|(bi, bj)| scores[(i, j)] > scores[(bi, bj)]) {
                    pick = Some((i, j));
                }
            }
        }
        let (i, j) = pick.expect("unused pair remains");
        out[i] = Some(j);
        row_used[i] = true;
        col_used[j] = true;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment<T> {
    /// `permutation[i]` is the estimated column matched to reference column `i`.
    pub permutation: Vec<usize>,
    /// Sign that turns the matched estimate into the reference orientation.
    pub signs: Vec<T>,
    /// Absolute correlations of the matched pairs, in [0, 1].
    pub correlations: Vec<T>,
}

impl<T: Real> Alignment<T> {
    pub fn min_correlation(&self) -> T {
        self.correlations.iter().copied().fold(T::one(), T::min)
    }

    /// Reorders and re-signs `estimated` into reference order.
    pub fn apply(&self, estimated: &Matrix<T>) -> Matrix<T> {
        Matrix::from_fn(estimated.rows(), self.permutation.len(), |t, i| {
            self.signs[i] * estimated[(t, self.permutation[i])]
        })
    }
}

pub fn align_sources<T: Real>(estimated: &Matrix<T>, truth: &Matrix<T>) -> Result<Alignment<T>> {
    if estimated.shape() != truth.shape() {
        return Err(Error::invalid(format!(
            "cannot align {:?} sources against {:?} references",
            estimated.shape(),
            truth.shape()
        )));
    }
    let corr = cross_correlation(truth, estimated);
    let abs = corr.map(T::abs);
    let assignment = best_assignment(&abs, EXHAUSTIVE_LIMIT);
    let permutation: Vec<usize> = assignment.into_iter().map(|a| a.expect("square assignment")).collect();
    let signs = permutation
        .iter()
        .enumerate()
        .map(|(i, &j)| if corr[(i, j)] < T::zero() { -T::one() } else { T::one() })
        .collect();
    let correlations = permutation.iter().enumerate().map(|(i, &j)| abs[(i, j)]).collect();
    Ok(Alignment { permutation, signs, correlations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;

    fn random_sources(n: usize, p: usize, seed: u64) -> Matrix<f64> {
        let mut rng = SeededRng::new(seed);
        Matrix::from_fn(n, p, |_, _| rng.gaussian())
    }

    #[test]
    fn self_alignment_is_identity() {
        let s = random_sources(200, 3, 1);
        let a = align_sources(&s, &s).unwrap();
        assert_eq!(a.permutation, vec![0, 1, 2]);
        assert!(a.correlations.iter().all(|&c| (c - 1.0).abs() < 1e-12));
    }

    #[test]
    fn recovers_swap_and_sign() {
        let s = random_sources(300, 2, 2);
        let est = Matrix::from_fn(300, 2, |t, j| if j == 0 { s[(t, 1)] } else { -s[(t, 0)] });
        let a = align_sources(&est, &s).unwrap();
        assert_eq!(a.permutation, vec![1, 0]);
        assert_eq!(a.signs, vec![-1.0, 1.0]);
        assert_eq!(a.apply(&est), s);
    }

    #[test]
    fn shape_mismatch() {
        assert!(align_sources(&random_sources(10, 2, 0), &random_sources(10, 3, 0)).is_err());
    }

    #[test]
    fn greedy_and_exhaustive_agree_on_clear_cases() {
        let scores = Matrix::from_rows(&[vec![0.9, 0.1, 0.2], vec![0.2, 0.8, 0.1]]).unwrap();
        assert_eq!(best_assignment(&scores, 6), vec![Some(0), Some(1)]);
        assert_eq!(best_assignment(&scores, 0), vec![Some(0), Some(1)]);
        let tall = scores.transpose();
        assert_eq!(best_assignment(&tall, 6), vec![Some(0), Some(1), None]);
    }

    #[test]
    fn exhaustive_beats_greedy_trap() {
        // greedy takes 0.9 first and is forced into 0.0
        let scores = Matrix::from_rows(&[vec![0.9, 0.8], vec![0.85, 0.0]]).unwrap();
        assert_eq!(best_assignment(&scores, 6), vec![Some(1), Some(0)]);
        assert_eq!(best_assignment(&scores, 1), vec![Some(0), Some(1)]);
    }
}
