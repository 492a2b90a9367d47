//! Small dense linear algebra on square `f64` matrices.
//!
//! Matrix sizes are the number of retained modes (tens to a few hundred).
//! Storage is row-major; factorizations are delegated to `nalgebra`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    n: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Mat {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Mat { n, data }
    }

    /// Builds from a row-major slice of length `n*n`.
    pub fn from_row_major(n: usize, values: &[f64]) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::domain(alloc::format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                values.len()
            )));
        }
        Ok(Mat {
            n,
            data: values.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        x.iter()
            .enumerate()
            .map(|(i, xi)| xi * dot(self.row(i), y))
            .sum()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        debug_assert_eq!(self.n, other.n);
        Mat {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    /// Symmetric eigendecomposition of the symmetric part of `self`.
    pub fn sym_eigen(&self) -> SymEigen {
        symmetric_eigen(self)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self[(i, j)] == 0.0))
    }

    /// Eigen-decomposition of a diagonal matrix: sorted diagonal, permuted
    /// unit vectors.
    pub fn diagonal_eigen(&self) -> SymEigen {
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|a, b| self[(*a, *a)].total_cmp(&self[(*b, *b)]));
        let values = order.iter().map(|i| self[(*i, *i)]).collect();
        let mut vectors = Mat::zeros(self.n);
        for (col, i) in order.iter().enumerate() {
            vectors[(*i, col)] = 1.0;
        }
        SymEigen { values, vectors }
    }

    /// Solves `A x = b` for symmetric positive definite `A`.
    pub fn cholesky_solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let chol = to_dmatrix(self).cholesky().ok_or_else(|| {
            Error::Singular(alloc::format!("{0}x{0} matrix is not positive definite", self.n))
        })?;
        let x = chol.solve(&DVector::from_column_slice(b));
        Ok(x.iter().copied().collect())
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

impl SymEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `Vᵀ x`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let n = self.vectors.dim();
        let mut out = vec![0.0; n];
        for (k, xk) in x.iter().enumerate() {
            let row = self.vectors.row(k);
            for (o, v) in out.iter_mut().zip(row) {
                *o += v * xk;
            }
        }
        out
    }

    /// `V c`.
    pub fn expand(&self, c: &[f64]) -> Vec<f64> {
        self.vectors.mul_vec(c)
    }
}

fn to_dmatrix(a: &Mat) -> DMatrix<f64> {
    DMatrix::from_fn(a.dim(), a.dim(), |i, j| a[(i, j)])
}

fn symmetric_eigen(a: &Mat) -> SymEigen {
    let n = a.dim();
    let sym = DMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Mat::from_fn(n, |r, c| eig.eigenvectors[(r, order[c])]);
    SymEigen { values, vectors }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}
