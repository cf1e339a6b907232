//! Small dense matrices: jittered Cholesky, triangular solves, symmetric eigenvalues.
//!
//! Matrices here are at most a few thousand rows (covariances on observation grids), so
//! plain row-major storage and textbook algorithms are sufficient.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a symmetric matrix from its lower triangle.
    pub fn symmetric_from_fn<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Domain("matrix data length does not match its shape"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                for (o, b) in out.row_mut(i).iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Replaces the matrix by `(A + Aᵀ) / 2`.
    pub fn symmetrize(&mut self) {
        assert_eq!(self.rows, self.cols, "symmetrize needs a square matrix");
        for i in 0..self.rows {
            for j in 0..i {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = avg;
                self[(j, i)] = avg;
            }
        }
    }

    /// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        assert_eq!(self.rows, self.cols, "eigenvalues need a square matrix");
        let n = self.rows;
        let mut a = self.clone();
        a.symmetrize();
        for _sweep in 0..64 {
            let mut off = 0.0;
            for i in 0..n {
                for j in 0..i {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
            let scale: f64 = a.diagonal().iter().map(|d| d * d).sum();
            if off <= 1e-30 * scale || off == 0.0 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eig = a.diagonal();
        eig.sort_by(f64::total_cmp);
        eig
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Smallest and largest relative jitter, applied as `scale * trace / n` in decades.
pub const JITTER_MIN: f64 = 1e-14;
pub const JITTER_MAX: f64 = 1e-8;

/// Lower-triangular factor `L` with `L Lᵀ = A + jitter·I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    lower: Matrix,
    jitter: f64,
}

impl Cholesky {
    /// Factors a symmetric positive semidefinite matrix.
    ///
    /// Exact zero directions (rows of a degenerate covariance) yield zero columns. If the
    /// factorization fails, diagonal jitter escalates in decades from
    /// `JITTER_MIN·trace/n` to `JITTER_MAX·trace/n` before giving up.
    pub fn factor(a: &Matrix) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::Domain("Cholesky needs a square matrix"));
        }
        let n = a.rows();
        if n == 0 {
            return Ok(Self {
                lower: Matrix::zeros(0, 0),
                jitter: 0.0,
            });
        }
        if let Some(lower) = factor_with(a, 0.0) {
            return Ok(Self { lower, jitter: 0.0 });
        }
        let base = a.trace().abs() / n as f64;
        let mut rel = JITTER_MIN;
        while rel <= JITTER_MAX * (1.0 + 1e-9) {
            let jitter = rel * base;
            if let Some(lower) = factor_with(a, jitter) {
                return Ok(Self { lower, jitter });
            }
            rel *= 10.0;
        }
        Err(Error::Degenerate("Cholesky failed after maximum jitter escalation"))
    }

    pub fn lower(&self) -> &Matrix {
        &self.lower
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn dim(&self) -> usize {
        self.lower.rows()
    }

    /// `L z`.
    pub fn mul_lower(&self, z: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let row = &self.lower.row(i)[..=i];
            out[i] = row.iter().zip(&z[..=i]).map(|(l, v)| l * v).sum();
        }
    }

    /// Solves `L x = b` in place; zero pivots leave the component at zero.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let row = self.lower.row(i);
            let mut acc = b[i];
            for k in 0..i {
                acc -= row[k] * b[k];
            }
            let d = row[i];
            b[i] = if d == 0.0 { 0.0 } else { acc / d };
        }
    }

    /// Solves `Lᵀ x = b` in place.
    pub fn solve_upper_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        for i in (0..n).rev() {
            let mut acc = b[i];
            for k in (i + 1)..n {
                acc -= self.lower[(k, i)] * b[k];
            }
            let d = self.lower[(i, i)];
            b[i] = if d == 0.0 { 0.0 } else { acc / d };
        }
    }

    /// Solves `(L Lᵀ) x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_lower_in_place(&mut x);
        self.solve_upper_in_place(&mut x);
        x
    }

    /// `‖L Lᵀ − A‖_F`, the reconstruction residual.
    pub fn reconstruction_error(&self, a: &Matrix) -> f64 {
        let llt = self.lower.matmul(&self.lower.transpose());
        let diff = Matrix::from_fn(a.rows(), a.cols(), |i, j| llt[(i, j)] - a[(i, j)]);
        diff.frobenius_norm()
    }
}

fn factor_with(a: &Matrix, jitter: f64) -> Option<Matrix> {
    let n = a.rows();
    let max_diag = (0..n).map(|i| a[(i, i)] + jitter).fold(0.0f64, f64::max);
    let tol = 64.0 * f64::EPSILON * max_diag * n as f64;
    let off_tol = 4.0 * (tol * max_diag).sqrt();
    let mut l = Matrix::zeros(n, n);
    let mut col = vec![0.0; n];
    for j in 0..n {
        let mut d = a[(j, j)] + jitter;
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        for i in (j + 1)..n {
            let mut r = a[(i, j)];
            let (ri, rj) = (l.row(i), l.row(j));
            for k in 0..j {
                r -= ri[k] * rj[k];
            }
            col[i] = r;
        }
        if !d.is_finite() {
            return None;
        }
        if d > tol {
            let piv = d.sqrt();
            l[(j, j)] = piv;
            for i in (j + 1)..n {
                l[(i, j)] = col[i] / piv;
            }
        } else if d >= -tol && col[j + 1..n].iter().all(|r| r.abs() <= off_tol) {
            // numerically null direction: leave the column at zero
        } else {
            return None;
        }
    }
    Some(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_known_matrix() {
        let a = Matrix::from_rows(3, 3, vec![4.0, 12.0, -16.0, 12.0, 37.0, -43.0, -16.0, -43.0, 98.0])
            .unwrap();
        let ch = Cholesky::factor(&a).unwrap();
        assert_eq!(ch.jitter(), 0.0);
        let expect = [2.0, 0.0, 0.0, 6.0, 1.0, 0.0, -8.0, 5.0, 3.0];
        for (x, e) in ch.lower().as_slice().iter().zip(expect) {
            assert!((x - e).abs() < 1e-12);
        }
        let x = ch.solve(&[1.0, 2.0, 3.0]);
        let back = a.mul_vec(&x);
        for (b, e) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert!((b - e).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_matrix_factors_to_zero() {
        let ch = Cholesky::factor(&Matrix::zeros(3, 3)).unwrap();
        assert!(ch.lower().as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn semidefinite_with_zero_row() {
        let a = Matrix::from_rows(3, 3, vec![0.0, 0.0, 0.0, 0.0, 2.0, 1.0, 0.0, 1.0, 2.0]).unwrap();
        let ch = Cholesky::factor(&a).unwrap();
        assert!(ch.reconstruction_error(&a) < 1e-14);
    }

    #[test]
    fn indefinite_is_degenerate() {
        let a = Matrix::from_rows(2, 2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(Cholesky::factor(&a), Err(Error::Degenerate(_))));
    }

    #[test]
    fn jacobi_eigenvalues() {
        let a = Matrix::from_rows(3, 3, vec![2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]).unwrap();
        let eig = a.symmetric_eigenvalues();
        let s = 2f64.sqrt();
        for (e, x) in eig.iter().zip([2.0 - s, 2.0, 2.0 + s]) {
            assert!((e - x).abs() < 1e-12);
        }
    }
}
