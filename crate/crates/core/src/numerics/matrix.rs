use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!("matrix data has {} entries, expected {rows}x{cols}", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged rows"));
        }
        Ok(Self { rows: rows.len(), cols, data: rows.concat() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_columns(cols: &[Vec<T>]) -> Result<Self> {
        let rows = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|c| c.len() != rows) {
            return Err(Error::invalid("ragged columns"));
        }
        Ok(Self::from_fn(rows, cols.len(), |i, j| cols[j][i]))
    }

    pub fn diag(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[T]) {
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn columns(&self) -> Vec<Vec<T>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    /// Keeps the listed columns, in order.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · other` without materializing the transpose.
    pub fn t_matmul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::invalid(format!(
                "cannot multiply ({}x{})ᵀ by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.cols, other.cols);
        for r in 0..self.rows {
            let a_row = self.row(r);
            let b_row = other.row(r);
            for (i, &a) in a_row.iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self · otherᵀ`.
    pub fn matmul_t(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::invalid(format!(
                "cannot multiply {}x{} by ({}x{})ᵀ",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.rows, other.rows, |i, j| dot(self.row(i), other.row(j))))
    }

    /// Gram matrix `(1/n)·XᵀX`, symmetric by construction.
    pub fn gram_scaled(&self) -> Self {
        let n = T::from_usize_lossy(self.rows.max(1));
        let mut g = self.t_matmul(self).expect("shapes agree");
        for i in 0..g.rows {
            for j in i..g.cols {
                let v = (g[(i, j)] + g[(j, i)]) / (n + n);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|x| x * c)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::invalid("shape mismatch in subtraction"));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        })
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Largest absolute asymmetry `|a_ij − a_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Sum of squared off-diagonal entries.
    pub fn off_diagonal_energy(&self) -> T {
        let mut s = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    s += self[(i, j)] * self[(i, j)];
                }
            }
        }
        s
    }

    /// `‖selfᵀ·self − I‖_∞` (max-abs entry), orthonormality of columns.
    pub fn orthonormality_error(&self) -> T {
        let g = self.t_matmul(self).expect("shapes agree");
        let mut worst = T::zero();
        for i in 0..g.rows {
            for j in 0..g.cols {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// Column means.
    pub fn column_means(&self) -> Vec<T> {
        let n = T::from_usize_lossy(self.rows.max(1));
        let mut means = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            for (m, &x) in means.iter_mut().zip(self.row(i)) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        means
    }

    /// Copy with every column shifted to zero mean.
    pub fn centered(&self) -> Self {
        let means = self.column_means();
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - means[j])
    }

    pub fn cast<U: Real>(&self) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| U::lit(x.as_f64())).collect() }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> =
                self.data[i * self.cols..(i + 1) * self.cols].iter().map(|x| format!("{x:?}")).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[inline]
pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Flips `v` so its largest-magnitude entry is positive; returns whether it flipped.
pub fn canonical_sign<T: Real>(v: &mut [T]) -> bool {
    let mut best = T::zero();
    let mut sign_negative = false;
    for &x in v.iter() {
        if x.abs() > best {
            best = x.abs();
            sign_negative = x < T::zero();
        }
    }
    if sign_negative {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    sign_negative
}

/// Orthonormalizes the columns in place with two passes of modified
/// Gram–Schmidt. Columns that collapse are replaced by unit vectors from the
/// standard basis that are orthogonal to the ones already accepted.
pub fn orthonormalize_columns<T: Real>(m: &mut Matrix<T>) {
    let (rows, cols) = m.shape();
    let tiny = T::epsilon() * T::lit(1e3);
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(cols);
    let mut next_unit = 0usize;
    for j in 0..cols {
        let mut v = m.column(j);
        let scale = norm(&v);
        let mut ok = false;
        if scale > T::zero() {
            for _ in 0..2 {
                for b in &basis {
                    let p = dot(&v, b);
                    v.iter_mut().zip(b).for_each(|(x, &bi)| *x -= p * bi);
                }
            }
            let nv = norm(&v);
            if nv > tiny * scale {
                v.iter_mut().for_each(|x| *x /= nv);
                ok = true;
            }
        }
        while !ok && next_unit < rows {
            v = vec![T::zero(); rows];
            v[next_unit] = T::one();
            next_unit += 1;
            for _ in 0..2 {
                for b in &basis {
                    let p = dot(&v, b);
                    v.iter_mut().zip(b).for_each(|(x, &bi)| *x -= p * bi);
                }
            }
            let nv = norm(&v);
            if nv > T::lit(1e-6) {
                v.iter_mut().for_each(|x| *x /= nv);
                ok = true;
            }
        }
        m.set_column(j, &v);
        basis.push(v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_variants_agree() {
        let a = Matrix::<f64>::from_fn(4, 3, |i, j| (i * 3 + j) as f64 - 4.0);
        let b = Matrix::<f64>::from_fn(4, 2, |i, j| (i + 2 * j) as f64 * 0.5);
        let direct = a.transpose().matmul(&b).unwrap();
        let fused = a.t_matmul(&b).unwrap();
        assert_eq!(direct, fused);
        let c = Matrix::<f64>::from_fn(2, 3, |i, j| (i as f64) - (j as f64));
        assert_eq!(a.matmul_t(&c).unwrap(), a.matmul(&c.transpose()).unwrap());
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn orthonormalize_handles_dependent_columns() {
        let mut m = Matrix::<f64>::from_rows(&[vec![1.0, 2.0, 0.0], vec![1.0, 2.0, 0.0], vec![0.0, 0.0, 0.0]]).unwrap();
        orthonormalize_columns(&mut m);
        assert!(m.orthonormality_error() < 1e-12);
    }

    #[test]
    fn canonical_sign_makes_largest_positive() {
        let mut v = vec![0.1, -3.0, 2.0];
        assert!(canonical_sign(&mut v));
        assert_eq!(v, vec![-0.1, 3.0, -2.0]);
    }
}
