use crate::error::{Error, Result};
use crate::numerics::{sym_eig, Matrix};
use crate::scalar::Real;

/// PCA whitening of an n × m data matrix down to `p` dimensions.
#[derive(Debug, Clone)]
pub struct Whitening<T> {
    pub mean: Vec<T>,
    /// p × m, maps centred rows to white coordinates.
    pub transform: Matrix<T>,
    /// n × p whitened data.
    pub z: Matrix<T>,
    pub eigenvalues: Vec<T>,
}

/// Eigenvalues above this fraction of the largest count toward the rank.
pub(crate) fn rank_tolerance<T: Real>(dim: usize) -> T {
    T::epsilon() * T::from_usize_lossy(dim.max(1)) * T::lit(1e3)
}

pub fn effective_rank<T: Real>(eigenvalues: &[T]) -> usize {
    let top = eigenvalues.first().copied().unwrap_or(T::zero());
    if !(top > T::zero()) {
        return 0;
    }
    let tol = top * rank_tolerance::<T>(eigenvalues.len());
    eigenvalues.iter().filter(|&&l| l > tol).count()
}

pub fn whiten<T: Real>(x: &Matrix<T>, p: usize) -> Result<Whitening<T>> {
    let mean = x.column_means();
    let xc = x.centered();
    let eig = sym_eig(&xc.gram_scaled())?;
    let rank = effective_rank(&eig.values);
    if rank < p {
        return Err(Error::RankDeficient { rank, requested: p });
    }
    let m = x.cols();
    let transform = Matrix::from_fn(p, m, |i, j| eig.vectors[(j, i)] / eig.values[i].sqrt());
    let z = xc.matmul_t(&transform)?;
    Ok(Whitening { mean, transform, z, eigenvalues: eig.values })
}

/// Rescales each column to zero mean and unit population variance.
pub(crate) fn standardize_columns<T: Real>(s: &mut Matrix<T>) {
    let (n, p) = s.shape();
    let nn = T::from_usize_lossy(n.max(1));
    for j in 0..p {
        let col = s.column(j);
        let mean = col.iter().copied().sum::<T>() / nn;
        let sd = (col.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / nn).sqrt();
        let scaled: Vec<T> =
            if sd > T::zero() { col.iter().map(|&v| (v - mean) / sd).collect() } else { vec![T::zero(); n] };
        s.set_column(j, &scaled);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;

    #[test]
    fn whitened_data_has_identity_covariance() {
        let mut rng = SeededRng::new(2);
        let x = Matrix::<f64>::from_fn(500, 4, |_, j| rng.gaussian() * (j + 1) as f64 + 3.0);
        let mut x2 = x.clone();
        // mix to correlate columns
        for i in 0..500 {
            x2[(i, 1)] += 0.5 * x[(i, 0)];
        }
        let w = whiten(&x2, 3).unwrap();
        let c = w.z.gram_scaled();
        assert!(c.sub(&Matrix::identity(3)).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn rank_deficiency_detected() {
        let x = Matrix::<f64>::from_fn(100, 3, |i, j| (i as f64).sin() * (j + 1) as f64);
        assert!(matches!(whiten(&x, 2), Err(Error::RankDeficient { rank: 1, requested: 2 })));
    }
}
