use std::ops::Range;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, symmetry_residual};
use crate::problems::{dimension, ClassicalHamiltonian, MAX_DENSE_SITES};

/// Eigenvalues closer than this are treated as one degenerate plateau level.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

/// `H_c + h Σ_i σ^x_i` as a dense real symmetric matrix in the computational basis.
pub fn plateau_hamiltonian(hamiltonian: &ClassicalHamiltonian, field: f64) -> Result<DMatrix<f64>> {
    let n = hamiltonian.n();
    if n > MAX_DENSE_SITES {
        return Err(Error::SizeCap { n, cap: MAX_DENSE_SITES, what: "dense operator" });
    }
    let energies = hamiltonian.energy_table()?;
    let dim = dimension(n);
    let mut m = DMatrix::zeros(dim, dim);
    for (x, e) in energies.iter().enumerate() {
        m[(x, x)] = *e;
        for b in 0..n {
            m[(x, x ^ (1 << b))] = field;
        }
    }
    Ok(m)
}

/// Eigen-decomposition of the plateau Hamiltonian (`γ = 1`).
#[derive(Debug, Clone)]
pub struct PlateauSpectrum {
    energies: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl PlateauSpectrum {
    /// Ascending eigenvalues `E_n`.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Column `n` is `|n⟩` in the computational basis.
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Index ranges of eigenvalues that agree within `tol` (consecutive gaps).
    pub fn degenerate_blocks(&self, tol: f64) -> Vec<Range<usize>> {
        let mut blocks = Vec::new();
        let mut start = 0;
        for n in 1..=self.energies.len() {
            if n == self.energies.len() || self.energies[n] - self.energies[n - 1] > tol {
                blocks.push(start..n);
                start = n;
            }
        }
        blocks
    }

    pub fn is_degenerate(&self, tol: f64) -> bool {
        self.energies.windows(2).any(|w| w[1] - w[0] <= tol)
    }

    /// `max |(V^T V - I)_ij|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let gram = self.vectors.transpose() * &self.vectors;
        max_abs(&(gram - DMatrix::identity(self.dim(), self.dim())))
    }

    /// `max |(H V - V diag(E))_ij|`.
    pub fn eigen_residual(&self, matrix: &DMatrix<f64>) -> f64 {
        let mut scaled = self.vectors.clone();
        for (n, e) in self.energies.iter().enumerate() {
            scaled.column_mut(n).scale_mut(*e);
        }
        max_abs(&(matrix * &self.vectors - scaled))
    }
}

/// Full spectrum of a real symmetric matrix with eigenvalues sorted ascending.
pub fn diagonalize_plateau(matrix: &DMatrix<f64>) -> Result<PlateauSpectrum> {
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::DimensionMismatch { expected: matrix.nrows(), got: matrix.ncols() });
    }
    let residual = symmetry_residual(matrix);
    if residual > 1e-9 {
        return Err(Error::NotHermitian { residual });
    }
    let eig = matrix.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..matrix.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(matrix.nrows(), matrix.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    Ok(PlateauSpectrum { energies, vectors })
}

/// Builds and diagonalizes the plateau Hamiltonian in one step.
pub fn plateau_spectrum(hamiltonian: &ClassicalHamiltonian, field: f64) -> Result<PlateauSpectrum> {
    let spectrum = diagonalize_plateau(&plateau_hamiltonian(hamiltonian, field)?)?;
    if spectrum.is_degenerate(DEGENERACY_TOLERANCE) {
        log::warn!(
            "plateau spectrum of the {} model (N={}) has degenerate levels; time averages use eigenspace projectors",
            hamiltonian.model_name(),
            hamiltonian.n()
        );
    }
    Ok(spectrum)
}
