//! Sparse non-negative matrix factorization by multiplicative updates,
//! minimizing ‖X − WH‖²_F + α(‖W‖₁ + ‖H‖₁).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{svd, Matrix};
use crate::scalar::Real;

pub const DENOM_EPS: f64 = 1e-12;

/// How possibly negative input is made non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NmfInput {
    /// Subtract the global minimum when it is negative.
    #[default]
    Shift,
    /// Use the data as given; negative entries are an error.
    Raw,
}

impl NmfInput {
    pub fn prepare<T: Real>(self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let min = x.as_slice().iter().copied().fold(T::infinity(), T::min);
        match self {
            NmfInput::Shift if min < T::zero() => Ok(x.map(|v| v - min)),
            NmfInput::Shift => Ok(x.clone()),
            NmfInput::Raw if min < T::zero() => Err(Error::invalid("NMF raw input mode requires non-negative data")),
            NmfInput::Raw => Ok(x.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NmfFit<T> {
    /// n × p activations.
    pub w: Matrix<T>,
    /// p × m basis.
    pub h: Matrix<T>,
    pub objective: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// NNDSVD initialization with zeros replaced by the data mean.
pub fn nndsvda<T: Real>(x: &Matrix<T>, p: usize) -> Result<(Matrix<T>, Matrix<T>)> {
    let (n, m) = x.shape();
    if p == 0 || p > n.min(m) {
        return Err(Error::invalid(format!("NMF rank {p} must lie in 1..={}", n.min(m))));
    }
    let d = svd(x)?;
    let mut w = Matrix::zeros(n, p);
    let mut h = Matrix::zeros(p, m);
    let pos = |v: &[T]| v.iter().map(|&a| a.max(T::zero())).collect::<Vec<T>>();
    let neg = |v: &[T]| v.iter().map(|&a| (-a).max(T::zero())).collect::<Vec<T>>();
    let l2 = |v: &[T]| v.iter().map(|&a| a * a).sum::<T>().sqrt();
    for j in 0..p {
        let uj = d.u.column(j);
        let vj = d.v.column(j);
        let (u, v, sigma) = if j == 0 {
            let u: Vec<T> = uj.iter().map(|a| a.abs()).collect();
            let v: Vec<T> = vj.iter().map(|a| a.abs()).collect();
            (u, v, T::one())
        } else {
            let (xp, xn, yp, yn) = (pos(&uj), neg(&uj), pos(&vj), neg(&vj));
            let (xpn, xnn, ypn, ynn) = (l2(&xp), l2(&xn), l2(&yp), l2(&yn));
            let (mp, mn) = (xpn * ypn, xnn * ynn);
            let unit = |v: Vec<T>, nrm: T| {
                if nrm > T::zero() {
                    v.into_iter().map(|a| a / nrm).collect()
                } else {
                    v
                }
            };
            if mp > mn {
                (unit(xp, xpn), unit(yp, ypn), mp)
            } else {
                (unit(xn, xnn), unit(yn, ynn), mn)
            }
        };
        let lambda = (d.s[j] * sigma).sqrt();
        for t in 0..n {
            w[(t, j)] = lambda * u[t];
        }
        for c in 0..m {
            h[(j, c)] = lambda * v[c];
        }
    }
    let avg = x.as_slice().iter().copied().sum::<T>() / T::from_usize_lossy(n * m);
    let fill = |a: T| if a == T::zero() { avg } else { a };
    Ok((w.map(fill), h.map(fill)))
}

pub fn objective<T: Real>(x: &Matrix<T>, w: &Matrix<T>, h: &Matrix<T>, alpha: T) -> Result<T> {
    let wh = w.matmul(h)?;
    let resid: T = x.as_slice().iter().zip(wh.as_slice()).map(|(&a, &b)| (a - b) * (a - b)).sum();
    let l1: T = w.as_slice().iter().chain(h.as_slice()).map(|v| v.abs()).sum();
    Ok(resid + alpha * l1)
}

/// `x` must already be non-negative.
pub fn factorize<T: Real>(x: &Matrix<T>, p: usize, alpha: T, tol: T, max_iter: usize) -> Result<NmfFit<T>> {
    if x.as_slice().iter().any(|&v| v < T::zero() || !v.is_finite()) {
        return Err(Error::invalid("NMF input must be finite and non-negative"));
    }
    let (mut w, mut h) = nndsvda(x, p)?;
    let eps = T::lit(DENOM_EPS);
    let half_alpha = alpha * T::lit(0.5);
    let mut objective = vec![self::objective(x, &w, &h, alpha)?];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        // H ← H ∘ WᵀX / (WᵀWH + α/2)
        let num = w.t_matmul(x)?;
        let den = w.t_matmul(&w)?.matmul(&h)?;
        h.as_mut_slice()
            .iter_mut()
            .zip(num.as_slice().iter().zip(den.as_slice()))
            .for_each(|(v, (&a, &b))| *v = *v * a / (b + half_alpha + eps));
        // W ← W ∘ XHᵀ / (WHHᵀ + α/2)
        let num = x.matmul_t(&h)?;
        let den = w.matmul(&h.matmul_t(&h)?)?;
        w.as_mut_slice()
            .iter_mut()
            .zip(num.as_slice().iter().zip(den.as_slice()))
            .for_each(|(v, (&a, &b))| *v = *v * a / (b + half_alpha + eps));

        let cur = self::objective(x, &w, &h, alpha)?;
        let prev = *objective.last().expect("initial objective");
        objective.push(cur);
        let scale = prev.abs().max(T::min_positive_value());
        if (prev - cur).abs() / scale < tol {
            converged = true;
            break;
        }
    }
    Ok(NmfFit { w, h, objective, iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;

    fn planted(n: usize, m: usize, p: usize, seed: u64) -> Matrix<f64> {
        let mut rng = SeededRng::new(seed);
        // half the entries zero: the planted factorization is essentially unique
        let mut draw = || if rng.uniform() < 0.5 { 0.0 } else { rng.uniform() };
        let w = Matrix::from_fn(n, p, |_, _| draw());
        let h = Matrix::from_fn(p, m, |_, _| draw());
        w.matmul(&h).unwrap()
    }

    #[test]
    fn recovers_planted_factorization() {
        for (seed, (n, m, p)) in [(200, 52, 2), (300, 52, 3), (120, 20, 3)].into_iter().enumerate() {
            let x = planted(n, m, p, seed as u64);
            let fit = factorize(&x, p, 0.0, 1e-12, 3000).unwrap();
            let rel = fit.w.matmul(&fit.h).unwrap().sub(&x).unwrap().frobenius_norm() / x.frobenius_norm();
            assert!(rel < 1e-3, "relative error {rel}");
        }
    }

    #[test]
    fn objective_never_increases() {
        let x = planted(80, 12, 4, 9).map(|v| v + 0.05);
        let fit = factorize(&x, 2, 0.1, 1e-5, 500).unwrap();
        for pair in fit.objective.windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-12), "{pair:?}");
        }
        assert!(fit.w.as_slice().iter().chain(fit.h.as_slice()).all(|&v| v >= 0.0));
    }

    #[test]
    fn sparsity_penalty_shrinks_l1() {
        let x = planted(150, 30, 3, 12).map(|v| v + 0.1);
        let l1 = |f: &NmfFit<f64>| f.w.as_slice().iter().chain(f.h.as_slice()).sum::<f64>();
        let plain = factorize(&x, 3, 0.0, 1e-5, 500).unwrap();
        let sparse = factorize(&x, 3, 0.1, 1e-5, 500).unwrap();
        assert!(l1(&sparse) <= l1(&plain));
    }

    #[test]
    fn input_modes() {
        let x = Matrix::from_rows(&[vec![-1.0, 2.0], vec![0.5, 3.0]]).unwrap();
        let s = NmfInput::Shift.prepare(&x).unwrap();
        assert_eq!(s.as_slice(), &[0.0, 3.0, 1.5, 4.0]);
        assert!(NmfInput::Raw.prepare(&x).is_err());
        assert!(factorize(&x, 1, 0.0, 1e-5, 10).is_err());
    }

    #[test]
    fn init_is_nonnegative() {
        let x = planted(50, 10, 3, 1);
        let (w, h) = nndsvda(&x, 3).unwrap();
        assert!(w.as_slice().iter().chain(h.as_slice()).all(|&v| v > 0.0));
        assert!(nndsvda(&x, 11).is_err());
    }
}
