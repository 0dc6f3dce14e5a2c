//! Thin singular value decomposition by one-sided (Hestenes) Jacobi.

use super::matrix::{canonical_sign, dot, norm, orthonormalize_columns, Matrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 80;

/// `a = U·diag(s)·Vᵀ` with `U` m×k, `V` n×k, `k = min(m, n)`.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: Matrix<T>,
    pub s: Vec<T>,
    pub v: Matrix<T>,
}

impl<T: Real> Svd<T> {
    pub fn reconstruct(&self) -> Matrix<T> {
        let (m, k) = self.u.shape();
        let n = self.v.rows();
        Matrix::from_fn(m, n, |i, j| (0..k).map(|r| self.u[(i, r)] * self.s[r] * self.v[(j, r)]).sum())
    }
}

/// Singular values come out descending. Right singular vectors are
/// sign-normalized (largest-magnitude entry positive) and `U` follows.
pub fn svd<T: Real>(a: &Matrix<T>) -> Result<Svd<T>> {
    if !a.all_finite() {
        return Err(Error::invalid("svd input has non-finite entries"));
    }
    if a.rows() < a.cols() {
        let t = svd(&a.transpose())?;
        let mut out = Svd { u: t.v, s: t.s, v: t.u };
        // keep the sign convention on V
        for j in 0..out.s.len() {
            let mut col = out.v.column(j);
            if canonical_sign(&mut col) {
                out.v.set_column(j, &col);
                let flipped: Vec<T> = out.u.column(j).iter().map(|&x| -x).collect();
                out.u.set_column(j, &flipped);
            }
        }
        return Ok(out);
    }

    let (m, n) = a.shape();
    // columns stored contiguously
    let mut w: Vec<Vec<T>> = a.columns();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|j| {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            e
        })
        .collect();
    let eps = T::epsilon();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha = dot(&w[i], &w[i]);
                let beta = dot(&w[j], &w[j]);
                let gamma = dot(&w[i], &w[j]);
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma + gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut w, i, j, c, s);
                rotate_pair(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let sv: Vec<T> = w.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).expect("finite singular values"));
    let s_max = order.first().map_or(T::zero(), |&i| sv[i]);
    let cutoff = s_max * eps * T::from_usize_lossy(m.max(n)) * T::lit(4.0);

    let mut u = Matrix::zeros(m, n);
    let mut vm = Matrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = sv[src];
        s.push(sigma);
        let mut vcol = v[src].clone();
        let flip = canonical_sign(&mut vcol);
        vm.set_column(dst, &vcol);
        if sigma > cutoff && sigma > T::zero() {
            let sign = if flip { -T::one() } else { T::one() };
            let ucol: Vec<T> = w[src].iter().map(|&x| sign * x / sigma).collect();
            u.set_column(dst, &ucol);
        }
    }
    orthonormalize_columns(&mut u);
    Ok(Svd { u, s, v: vm })
}

fn rotate_pair<T: Real>(cols: &mut [Vec<T>], i: usize, j: usize, c: T, s: T) {
    let (left, right) = cols.split_at_mut(j);
    let (ci, cj) = (&mut left[i], &mut right[0]);
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let (xi, yj) = (*x, *y);
        *x = c * xi - s * yj;
        *y = s * xi + c * yj;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eigen::sym_eig;
    use crate::numerics::rng::SeededRng;

    #[test]
    fn diagonal_values() {
        let d = svd(&Matrix::<f64>::diag(&[2.0, 3.0])).unwrap();
        assert_eq!(d.s, vec![3.0, 2.0]);
    }

    #[test]
    fn rank_one_outer_product() {
        let u = [1.0, 2.0, 2.0];
        let v = [3.0, 4.0];
        let a = Matrix::<f64>::from_fn(3, 2, |i, j| u[i] * v[j]);
        let d = svd(&a).unwrap();
        assert!((d.s[0] - 15.0).abs() < 1e-12);
        assert!(d.s[1].abs() < 1e-12);
        assert!(d.u.orthonormality_error() < 1e-10);
        assert!(d.reconstruct().sub(&a).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn squared_singular_values_match_gram_eigenvalues() {
        let mut rng = SeededRng::new(5);
        let a = Matrix::<f64>::from_fn(5, 3, |_, _| rng.gaussian());
        let d = svd(&a).unwrap();
        let eig = sym_eig(&a.t_matmul(&a).unwrap()).unwrap();
        for (s, l) in d.s.iter().zip(&eig.values) {
            assert!((s * s - l).abs() < 1e-8);
        }
    }

    #[test]
    fn wide_and_tall_reconstruct() {
        let mut rng = SeededRng::new(9);
        for (m, n) in [(7, 3), (3, 7), (52, 52), (1, 4), (4, 1)] {
            let a = Matrix::<f64>::from_fn(m, n, |_, _| rng.gaussian());
            let d = svd(&a).unwrap();
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]) && d.s.iter().all(|&x| x >= 0.0));
            assert!(d.reconstruct().sub(&a).unwrap().frobenius_norm() <= 1e-10 * a.frobenius_norm());
            assert!(d.u.orthonormality_error() < 1e-8);
            assert!(d.v.orthonormality_error() < 1e-8);
        }
    }

    #[test]
    fn rejects_nan() {
        let a = Matrix::from_rows(&[vec![f64::NAN]]).unwrap();
        assert!(svd(&a).is_err());
    }
}
