//! Dense complex matrices stored as separate real and imaginary parts, so that
//! products run through the real GEMM kernels.

use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { re: DMatrix::zeros(rows, cols), im: DMatrix::zeros(rows, cols) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { re: DMatrix::identity(dim, dim), im: DMatrix::zeros(dim, dim) }
    }

    pub fn from_real(re: DMatrix<f64>) -> Self {
        let im = DMatrix::zeros(re.nrows(), re.ncols());
        Self { re, im }
    }

    pub fn nrows(&self) -> usize {
        self.re.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.re.ncols()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.re[(i, j)], self.im[(i, j)])
    }

    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.re[(i, j)] = z.re;
        self.im[(i, j)] = z.im;
    }

    pub fn transpose(&self) -> Self {
        Self { re: self.re.transpose(), im: self.im.transpose() }
    }

    pub fn adjoint(&self) -> Self {
        Self { re: self.re.transpose(), im: -self.im.transpose() }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let re = &self.re * &rhs.re - &self.im * &rhs.im;
        let im = &self.re * &rhs.im + &self.im * &rhs.re;
        Self { re, im }
    }

    /// `lhs * self` for a real left factor.
    pub fn left_mul_real(&self, lhs: &DMatrix<f64>) -> Self {
        Self { re: lhs * &self.re, im: lhs * &self.im }
    }

    /// Entrywise squared modulus.
    pub fn abs_squared(&self) -> DMatrix<f64> {
        self.re.zip_map(&self.im, |a, b| a * a + b * b)
    }

    /// `max |A_ij - B_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (i, j) in (0..self.nrows()).flat_map(|i| (0..self.ncols()).map(move |j| (i, j))) {
            worst = worst.max((self.get(i, j) - other.get(i, j)).norm());
        }
        worst
    }

    /// `max |(A†A - I)_ij|`.
    pub fn unitarity_residual(&self) -> f64 {
        let prod = self.adjoint().mul(self);
        prod.max_abs_diff(&Self::identity(self.ncols()))
    }
}

/// `max |A_ij - A_ji|`.
pub fn symmetry_residual(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// `max |A_ij|`.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}
