//! Tucker decomposition by higher-order orthogonal iteration (HOOI),
//! initialized from the truncated HOSVD.

use crate::error::{Error, Result};
use crate::numerics::{canonical_sign, orthonormalize_columns, sym_eig, Matrix, Tensor3};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct Tucker<T> {
    pub core: Tensor3<T>,
    /// Orthonormal factors, `factors[k]` is dₖ × rₖ.
    pub factors: [Matrix<T>; 3],
    /// Fit after initialization and after every sweep.
    pub fit_trace: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Real> Tucker<T> {
    pub fn reconstruct(&self) -> Result<Tensor3<T>> {
        self.core
            .mode_product(0, &self.factors[0])?
            .mode_product(1, &self.factors[1])?
            .mode_product(2, &self.factors[2])
    }
}

/// Leading `r` left singular vectors of `y` (orthonormal columns), computed
/// from whichever Gram matrix is smaller.
pub fn leading_left_singular<T: Real>(y: &Matrix<T>, r: usize) -> Result<Matrix<T>> {
    let (rows, cols) = y.shape();
    let mut u = if rows <= cols {
        let g = y.matmul_t(y)?;
        let eig = sym_eig(&g)?;
        Matrix::from_fn(rows, r, |i, k| eig.vectors[(i, k)])
    } else {
        let g = y.t_matmul(y)?;
        let eig = sym_eig(&g)?;
        let v = Matrix::from_fn(cols, r.min(cols), |i, k| eig.vectors[(i, k)]);
        let mut u = Matrix::zeros(rows, r);
        let yv = y.matmul(&v)?;
        for k in 0..r.min(cols) {
            let col = yv.column(k);
            let nrm = col.iter().map(|&a| a * a).sum::<T>().sqrt();
            if nrm > T::zero() {
                u.set_column(k, &col.iter().map(|&a| a / nrm).collect::<Vec<_>>());
            }
        }
        u
    };
    orthonormalize_columns(&mut u);
    for k in 0..r {
        let mut c = u.column(k);
        if canonical_sign(&mut c) {
            u.set_column(k, &c);
        }
    }
    Ok(u)
}

fn fit_value<T: Real>(x_norm2: T, core: &Tensor3<T>) -> T {
    let g = core.frobenius_norm();
    let resid = (x_norm2 - g * g).max(T::zero()).sqrt();
    T::one() - resid / x_norm2.sqrt()
}

pub fn hooi<T: Real>(x: &Tensor3<T>, ranks: [usize; 3], tol: T, max_iter: usize) -> Result<Tucker<T>> {
    let dims = x.dims();
    for k in 0..3 {
        if ranks[k] == 0 || ranks[k] > dims[k] {
            return Err(Error::invalid(format!(
                "Tucker rank {} out of range for mode {k} of size {}",
                ranks[k], dims[k]
            )));
        }
    }
    if !x.all_finite() {
        return Err(Error::invalid("Tucker input has non-finite entries"));
    }
    let xn = x.frobenius_norm();
    if !(xn > T::zero()) {
        return Err(Error::DegenerateInput("Tucker input tensor is all zeros".into()));
    }
    let x_norm2 = xn * xn;
    let mut factors = [
        leading_left_singular(&x.unfold(0), ranks[0])?,
        leading_left_singular(&x.unfold(1), ranks[1])?,
        leading_left_singular(&x.unfold(2), ranks[2])?,
    ];
    let project_all = |f: &[Matrix<T>; 3]| -> Result<Tensor3<T>> {
        x.mode_product(0, &f[0].transpose())?.mode_product(1, &f[1].transpose())?.mode_product(2, &f[2].transpose())
    };
    let mut core = project_all(&factors)?;
    let mut fit_trace = vec![fit_value(x_norm2, &core)];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        for mode in 0..3 {
            let mut y = x.clone();
            for other in (0..3).filter(|&o| o != mode) {
                y = y.mode_product(other, &factors[other].transpose())?;
            }
            factors[mode] = leading_left_singular(&y.unfold(mode), ranks[mode])?;
        }
        core = project_all(&factors)?;
        let fit = fit_value(x_norm2, &core);
        let prev = *fit_trace.last().expect("initial fit");
        fit_trace.push(fit);
        if (fit - prev).abs() < tol {
            converged = true;
            break;
        }
    }
    Ok(Tucker { core, factors, fit_trace, iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;

    fn random_orthonormal(rng: &mut SeededRng, d: usize, r: usize) -> Matrix<f64> {
        let mut m = Matrix::from_fn(d, r, |_, _| rng.gaussian());
        orthonormalize_columns(&mut m);
        m
    }

    #[test]
    fn planted_core_is_recovered() {
        let mut rng = SeededRng::new(11);
        let ranks = [2, 2, 2];
        let core = Tensor3::from_fn(ranks, |_, _, _| rng.gaussian());
        let fs = [
            random_orthonormal(&mut rng, 40, 2),
            random_orthonormal(&mut rng, 8, 2),
            random_orthonormal(&mut rng, 3, 2),
        ];
        let x = core.mode_product(0, &fs[0]).unwrap().mode_product(1, &fs[1]).unwrap().mode_product(2, &fs[2]).unwrap();
        let t = hooi(&x, ranks, 1e-10, 50).unwrap();
        let rec = t.reconstruct().unwrap();
        let err: f64 = rec.as_slice().iter().zip(x.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        assert!(err / x.frobenius_norm() < 1e-6);
        for f in &t.factors {
            assert!(f.orthonormality_error() < 1e-8);
        }
    }

    #[test]
    fn fit_is_monotone() {
        let mut rng = SeededRng::new(3);
        let x = Tensor3::from_fn([30, 10, 3], |_, _, _| rng.gaussian());
        let t = hooi(&x, [3, 3, 2], 1e-12, 30).unwrap();
        for w in t.fit_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-10, "{w:?}");
        }
    }

    #[test]
    fn bad_ranks_and_zero_tensor() {
        let x = Tensor3::<f64>::zeros(5, 4, 3);
        assert!(hooi(&x, [1, 1, 4], 1e-6, 10).is_err());
        assert!(matches!(hooi(&x, [1, 1, 1], 1e-6, 10), Err(Error::DegenerateInput(_))));
    }
}
