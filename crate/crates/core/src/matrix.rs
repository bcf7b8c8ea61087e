//! Row-major dense matrix used for adjacency, distance and weight storage.

use crate::error::{ensure_len, Result, SnnError};
use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        ensure_len("matrix data", rows * cols, data.len())?;
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            ensure_len("matrix row", cols, r.len())?;
            data.extend_from_slice(r);
        }
        Ok(DenseMatrix {
            rows: rows.len(),
            cols,
            data,
        })
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
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self · x` for a dense vector.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        ensure_len("matrix-vector product", self.cols, x.len())?;
        let mut out = vec![0.0; self.rows];
        par::fill_indexed(&mut out, |i| {
            self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()
        });
        Ok(out)
    }

    /// `self · x` where `x` is nonzero only at `support`; the sum runs over
    /// the support in ascending order.
    pub fn mul_sparse(&self, x: &[f64], support: &[usize]) -> Result<Vec<f64>> {
        ensure_len("matrix-vector product", self.cols, x.len())?;
        if let Some(&j) = support.iter().find(|&&j| j >= self.cols) {
            return Err(SnnError::DimensionMismatch {
                context: "sparse support index",
                expected: self.cols,
                found: j,
            });
        }
        let mut out = vec![0.0; self.rows];
        if support.is_empty() {
            return Ok(out);
        }
        par::fill_indexed(&mut out, |i| {
            let row = self.row(i);
            support.iter().map(|&j| row[j] * x[j]).sum()
        });
        Ok(out)
    }
}

/// Indices of the nonzero entries of `x`, ascending.
pub fn support(x: &[f64]) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_product_matches_dense() {
        let m = DenseMatrix::from_fn(5, 7, |i, j| (i * 7 + j) as f64 * 0.25 - 3.0);
        let x = vec![0.0, 1.0, 0.0, 0.5, 0.0, 0.0, 2.0];
        let dense = m.mul_vec(&x).unwrap();
        let sparse = m.mul_sparse(&x, &support(&x)).unwrap();
        for (a, b) in dense.iter().zip(&sparse) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_errors() {
        let m = DenseMatrix::zeros(2, 3);
        assert!(m.mul_vec(&[1.0, 2.0]).is_err());
        assert!(DenseMatrix::from_vec(2, 2, vec![1.0]).is_err());
        assert!(DenseMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn transpose_and_symmetry() {
        let m = DenseMatrix::from_fn(3, 2, |i, j| (i + 10 * j) as f64);
        assert_eq!(m.transpose().transpose(), m);
        assert!(!m.is_symmetric(0.0));
        let s = DenseMatrix::from_fn(3, 3, |i, j| (i + j) as f64);
        assert!(s.is_symmetric(0.0));
    }
}
