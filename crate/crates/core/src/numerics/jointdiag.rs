//! Approximate joint diagonalization of a set of symmetric matrices by
//! Jacobi rotations. Each rotation angle is the closed-form optimum of the
//! 2×2 sub-problem summed over all matrices, so the total off-diagonal energy
//! never increases.

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_MAX_SWEEPS: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct JointDiagonalization<T> {
    /// Orthogonal `W` such that `W·Mₖ·Wᵀ` is as diagonal as possible.
    pub w: Matrix<T>,
    /// `Σₖ off(W·Mₖ·Wᵀ)` before the first sweep and after every sweep.
    pub off_trace: Vec<T>,
    pub sweeps: usize,
    pub converged: bool,
}

impl<T: Real> JointDiagonalization<T> {
    pub fn final_off_energy(&self) -> T {
        *self.off_trace.last().expect("trace holds the initial value")
    }
}

pub fn total_off_energy<T: Real>(mats: &[Matrix<T>]) -> T {
    mats.iter().map(Matrix::off_diagonal_energy).sum()
}

pub fn joint_diagonalize<T: Real>(mats: &[Matrix<T>], max_sweeps: usize, tol: T) -> Result<JointDiagonalization<T>> {
    let first = mats.first().ok_or_else(|| Error::invalid("joint_diagonalize needs at least one matrix"))?;
    let n = first.rows();
    if mats.iter().any(|m| m.rows() != n || m.cols() != n) {
        return Err(Error::invalid("joint_diagonalize matrices must share one square dimension"));
    }
    if mats.iter().any(|m| !m.all_finite()) {
        return Err(Error::invalid("joint_diagonalize input has non-finite entries"));
    }

    let mut work: Vec<Matrix<T>> = mats.to_vec();
    let mut v = Matrix::<T>::identity(n);
    let mut off_trace = vec![total_off_energy(&work)];
    let mut converged = n < 2;
    let mut sweeps = 0;

    while !converged && sweeps < max_sweeps {
        sweeps += 1;
        let mut any = false;
        for p in 0..n {
            for q in (p + 1)..n {
                // G = Σ g gᵀ with g = [a_pp − a_qq, a_pq + a_qp]
                let (mut g11, mut g12, mut g22) = (T::zero(), T::zero(), T::zero());
                for m in &work {
                    let d = m[(p, p)] - m[(q, q)];
                    let o = m[(p, q)] + m[(q, p)];
                    g11 += d * d;
                    g12 += d * o;
                    g22 += o * o;
                }
                let ton = g11 - g22;
                let toff = g12 + g12;
                let theta = T::lit(0.5) * toff.atan2(ton + (ton * ton + toff * toff).sqrt());
                if theta.abs() <= tol {
                    continue;
                }
                any = true;
                let (s, c) = theta.sin_cos();
                for m in work.iter_mut() {
                    rotate_similarity(m, p, q, c, s);
                }
                for k in 0..n {
                    let (vp, vq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vp + s * vq;
                    v[(k, q)] = c * vq - s * vp;
                }
            }
        }
        off_trace.push(total_off_energy(&work));
        if !any {
            converged = true;
        }
    }

    Ok(JointDiagonalization { w: v.transpose(), off_trace, sweeps, converged })
}

/// `M ← Gᵀ·M·G` for the plane rotation `G = [[c, −s], [s, c]]` on rows/cols p, q.
fn rotate_similarity<T: Real>(m: &mut Matrix<T>, p: usize, q: usize, c: T, s: T) {
    let n = m.rows();
    for k in 0..n {
        let (mp, mq) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = c * mp + s * mq;
        m[(q, k)] = c * mq - s * mp;
    }
    for k in 0..n {
        let (mp, mq) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = c * mp + s * mq;
        m[(k, q)] = c * mq - s * mp;
    }
}
