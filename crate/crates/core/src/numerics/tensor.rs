use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::scalar::Real;

/// Dense 3-way tensor, index order (time, subcarrier, antenna), last index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<T> {
    dims: [usize; 3],
    data: Vec<T>,
}

impl<T: Real> Tensor3<T> {
    pub fn zeros(d0: usize, d1: usize, d2: usize) -> Self {
        Self { dims: [d0, d1, d2], data: vec![T::zero(); d0 * d1 * d2] }
    }

    pub fn from_vec(dims: [usize; 3], data: Vec<T>) -> Result<Self> {
        if data.len() != dims.iter().product::<usize>() {
            return Err(Error::invalid(format!("tensor data length {} does not match {dims:?}", data.len())));
        }
        Ok(Self { dims, data })
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dims.iter().product());
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    data.push(f(i, j, k));
                }
            }
        }
        Self { dims, data }
    }

    #[inline]
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.dims[0] && j < self.dims[1] && k < self.dims[2]);
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: T) {
        let o = self.offset(i, j, k);
        self.data[o] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Series along mode 0 at fixed (j, k).
    pub fn fiber(&self, j: usize, k: usize) -> Vec<T> {
        (0..self.dims[0]).map(|i| self.get(i, j, k)).collect()
    }

    pub fn set_fiber(&mut self, j: usize, k: usize, values: &[T]) {
        for (i, &v) in values.iter().enumerate() {
            self.set(i, j, k, v);
        }
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { dims: self.dims, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    /// d0 × d1 matrix averaging over mode 2.
    pub fn mean_over_last(&self) -> Matrix<T> {
        let [d0, d1, d2] = self.dims;
        let inv = T::one() / T::from_usize_lossy(d2.max(1));
        Matrix::from_fn(d0, d1, |i, j| (0..d2).map(|k| self.get(i, j, k)).sum::<T>() * inv)
    }

    /// (d0·d2) × d1 matrix with mode-2 slices stacked as extra rows.
    pub fn stack_last_as_rows(&self) -> Matrix<T> {
        let [d0, d1, d2] = self.dims;
        Matrix::from_fn(d0 * d2, d1, |r, j| self.get(r / d2, j, r % d2))
    }

    /// Mode-n unfolding: rows indexed by mode `n`, columns by the remaining
    /// modes in increasing order (earlier remaining mode varies slowest).
    pub fn unfold(&self, mode: usize) -> Matrix<T> {
        let [d0, d1, d2] = self.dims;
        match mode {
            0 => Matrix::from_fn(d0, d1 * d2, |i, c| self.get(i, c / d2, c % d2)),
            1 => Matrix::from_fn(d1, d0 * d2, |j, c| self.get(c / d2, j, c % d2)),
            2 => Matrix::from_fn(d2, d0 * d1, |k, c| self.get(c / d1, c % d1, k)),
            _ => panic!("mode {mode} out of range for a 3-way tensor"),
        }
    }

    /// `self ×ₙ m`, where `m` is r × dₙ.
    pub fn mode_product(&self, mode: usize, m: &Matrix<T>) -> Result<Self> {
        let mut dims = self.dims;
        if m.cols() != dims[mode] {
            return Err(Error::invalid(format!("mode-{mode} product needs {} columns, got {}", dims[mode], m.cols())));
        }
        dims[mode] = m.rows();
        let mut out = Self::zeros(dims[0], dims[1], dims[2]);
        let [s0, s1, s2] = self.dims;
        for i in 0..s0 {
            for j in 0..s1 {
                for k in 0..s2 {
                    let x = self.get(i, j, k);
                    if x == T::zero() {
                        continue;
                    }
                    let src = [i, j, k][mode];
                    for r in 0..m.rows() {
                        let mut idx = [i, j, k];
                        idx[mode] = r;
                        let o = out.offset(idx[0], idx[1], idx[2]);
                        out.data[o] += m[(r, src)] * x;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn cast<U: Real>(&self) -> Tensor3<U> {
        Tensor3 { dims: self.dims, data: self.data.iter().map(|&x| U::lit(x.as_f64())).collect() }
    }
}
