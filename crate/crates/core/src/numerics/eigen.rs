//! Symmetric eigendecomposition by the cyclic Jacobi method.

use super::matrix::{canonical_sign, Matrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix, eigenvalues descending and eigenvectors
/// stored as orthonormal columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

impl<T: Real> EigenDecomposition<T> {
    pub fn vector(&self, i: usize) -> Vec<T> {
        self.vectors.column(i)
    }

    /// `V·diag(λ)·Vᵀ`.
    pub fn reconstruct(&self) -> Matrix<T> {
        let n = self.values.len();
        let v = &self.vectors;
        Matrix::from_fn(n, n, |i, j| (0..n).map(|k| v[(i, k)] * self.values[k] * v[(j, k)]).sum())
    }
}

pub(crate) fn symmetry_tolerance<T: Real>(a: &Matrix<T>) -> T {
    let base = T::lit(1e-9).max(T::epsilon() * T::lit(64.0));
    base * T::one().max(a.max_abs())
}

/// Eigendecomposition of a symmetric matrix.
///
/// Eigenvectors are sign-normalized so that each column's largest-magnitude
/// entry is positive.
pub fn sym_eig<T: Real>(a: &Matrix<T>) -> Result<EigenDecomposition<T>> {
    if !a.is_square() {
        return Err(Error::invalid(format!("sym_eig needs a square matrix, got {:?}", a.shape())));
    }
    if !a.all_finite() {
        return Err(Error::invalid("sym_eig input has non-finite entries"));
    }
    if a.asymmetry() > symmetry_tolerance(a) {
        return Err(Error::invalid(format!("sym_eig input is not symmetric (max asymmetry {:e})", a.asymmetry())));
    }
    let n = a.rows();
    let mut m = Matrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)]) / T::lit(2.0));
    let mut v = Matrix::identity(n);
    let scale = m.frobenius_norm();
    let target = T::epsilon() * scale;

    for _ in 0..MAX_SWEEPS {
        if m.off_diagonal_energy().sqrt() <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (apq + apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                rotate(&mut m, &mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| m[(i, i)]).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).expect("finite eigenvalues"));

    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = v.select_columns(&order);
    for j in 0..n {
        let mut col = vectors.column(j);
        if canonical_sign(&mut col) {
            vectors.set_column(j, &col);
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

fn rotate<T: Real>(m: &mut Matrix<T>, v: &mut Matrix<T>, p: usize, q: usize, c: T, s: T) {
    let n = m.rows();
    for k in 0..n {
        let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = T::zero();
    m[(q, p)] = T::zero();
    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Inverse square root of a symmetric positive definite matrix.
pub fn inv_sqrt_spd<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let eig = sym_eig(a)?;
    let n = a.rows();
    let floor = eig.values.first().copied().unwrap_or(T::zero()) * T::epsilon() * T::lit(16.0);
    if eig.values.iter().any(|&l| l <= floor.max(T::min_positive_value())) {
        return Err(Error::DegenerateInput("matrix is not positive definite".into()));
    }
    let d: Vec<T> = eig.values.iter().map(|&l| T::one() / l.sqrt()).collect();
    let v = &eig.vectors;
    Ok(Matrix::from_fn(n, n, |i, j| (0..n).map(|k| v[(i, k)] * d[k] * v[(j, k)]).sum()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng::SeededRng;

    fn random_symmetric(n: usize, rng: &mut SeededRng) -> Matrix<f64> {
        let b = Matrix::from_fn(n, n, |_, _| rng.gaussian());
        Matrix::from_fn(n, n, |i, j| b[(i, j)] + b[(j, i)])
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let eig = sym_eig(&Matrix::<f64>::identity(3)).unwrap();
        assert_eq!(eig.values, vec![1.0, 1.0, 1.0]);
        assert!(eig.vectors.orthonormality_error() < 1e-12);
    }

    #[test]
    fn diagonal_matrix() {
        let eig = sym_eig(&Matrix::<f64>::diag(&[1.0, 4.0])).unwrap();
        assert_eq!(eig.values, vec![4.0, 1.0]);
        assert_eq!(eig.vector(0), vec![0.0, 1.0]);
        assert_eq!(eig.vector(1), vec![1.0, 0.0]);
    }

    #[test]
    fn rejects_bad_input() {
        let ns = Matrix::<f64>::zeros(2, 3);
        assert!(matches!(sym_eig(&ns), Err(Error::InvalidInput(_))));
        let asym = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&asym), Err(Error::InvalidInput(_))));
        let nan = Matrix::from_rows(&[vec![f64::NAN, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&nan), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn eigenpairs_and_trace() {
        let mut rng = SeededRng::new(11);
        for n in [1, 2, 5, 17, 52] {
            let a = random_symmetric(n, &mut rng);
            let eig = sym_eig(&a).unwrap();
            assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
            assert!(eig.vectors.orthonormality_error() < 1e-8);
            let scale = a.frobenius_norm();
            assert!(eig.reconstruct().sub(&a).unwrap().frobenius_norm() <= 1e-6 * scale);
            for i in 0..n {
                let v = eig.vector(i);
                for r in 0..n {
                    let av: f64 = (0..n).map(|k| a[(r, k)] * v[k]).sum();
                    assert!((av - eig.values[i] * v[r]).abs() <= 1e-6 * scale.max(1.0));
                }
            }
            let tr: f64 = eig.values.iter().sum();
            assert!((tr - a.trace()).abs() <= 1e-8 * scale.max(1.0));
        }
    }

    #[test]
    fn works_in_single_precision() {
        let a = Matrix::<f32>::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let eig = sym_eig(&a).unwrap();
        assert!((eig.values[0] - 3.0).abs() < 1e-5 && (eig.values[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn inverse_square_root() {
        let a = Matrix::<f64>::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let r = inv_sqrt_spd(&a).unwrap();
        let back = r.matmul(&a).unwrap().matmul(&r).unwrap();
        assert!(back.sub(&Matrix::identity(2)).unwrap().max_abs() < 1e-12);
        assert!(inv_sqrt_spd(&Matrix::<f64>::zeros(2, 2)).is_err());
    }
}
