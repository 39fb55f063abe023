//! Small dense complex matrices for gates and Kraus operators.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Index, IndexMut, Mul};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Square row-major complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from rows. Panics when the rows are not square.
    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "matrix must be square");
            data.extend_from_slice(r);
        }
        Self { dim, data }
    }

    pub fn from_real(dim: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), dim * dim);
        Self { dim, data: values.iter().map(|&v| c(v, 0.0)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&v| v * s).collect() }
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|v| v.conj()).collect() }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    /// Kronecker product `self ⊗ other`, with `self` on the high index bits.
    pub fn kron(&self, other: &Self) -> Self {
        let d = self.dim * other.dim;
        let mut m = Self::zeros(d);
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..other.dim {
                    for l in 0..other.dim {
                        m[(i * other.dim + k, j * other.dim + l)] = self[(i, j)] * other[(k, l)];
                    }
                }
            }
        }
        m
    }

    /// Largest entrywise distance to another matrix.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Complex64;
    fn index(&self, (r, col): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + col]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, col): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + col]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    m[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        m
    }
}

/// Applies a `2^k`-dimensional matrix to the listed bit positions of a state
/// vector indexed by packed bits. `targets[0]` is the least-significant bit of
/// the matrix index.
pub(crate) fn apply_matrix(vec: &mut [Complex64], m: &Matrix, targets: &[usize]) {
    let k = targets.len();
    let dim = 1usize << k;
    debug_assert_eq!(m.dim(), dim);
    let mask: usize = targets.iter().map(|&t| 1usize << t).sum();
    let offsets: Vec<usize> =
        (0..dim).map(|s| targets.iter().enumerate().map(|(j, &t)| ((s >> j) & 1) << t).sum()).collect();
    let mut buf = vec![ZERO; dim];
    for base in 0..vec.len() {
        if base & mask != 0 {
            continue;
        }
        for (s, &off) in offsets.iter().enumerate() {
            buf[s] = vec[base | off];
        }
        for (r, &off) in offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (s, &b) in buf.iter().enumerate() {
                acc += m[(r, s)] * b;
            }
            vec[base | off] = acc;
        }
    }
}
