use super::hamiltonian::ClassicalHamiltonian;
use crate::error::{invalid, Result};

/// Normalized Boltzmann distribution over all `2^N` configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct BoltzmannTarget {
    beta: f64,
    energies: Vec<f64>,
    probabilities: Vec<f64>,
    log_probabilities: Vec<f64>,
    log_partition: f64,
}

impl BoltzmannTarget {
    /// Builds the target from a precomputed energy table.
    pub fn from_energies(energies: Vec<f64>, beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(invalid(format!("inverse temperature must be finite and >= 0, got {beta}")));
        }
        if energies.is_empty() {
            return Err(invalid("empty energy table"));
        }
        let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let shifted: Vec<f64> = energies.iter().map(|e| -beta * (e - e_min)).collect();
        let z_shifted: f64 = shifted.iter().map(|s| s.exp()).sum();
        let ln_z_shifted = z_shifted.ln();
        let log_probabilities: Vec<f64> = shifted.iter().map(|s| s - ln_z_shifted).collect();
        let probabilities = log_probabilities.iter().map(|l| l.exp()).collect();
        Ok(Self { beta, energies, probabilities, log_probabilities, log_partition: ln_z_shifted - beta * e_min })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn log_probabilities(&self) -> &[f64] {
        &self.log_probabilities
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `ln Z` for the unshifted energies.
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn min_probability(&self) -> f64 {
        self.probabilities.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Total mass of the configurations in `subset`.
    pub fn mass(&self, subset: &[usize]) -> f64 {
        subset.iter().map(|&x| self.probabilities[x]).sum()
    }
}

/// Boltzmann target of `hamiltonian` at inverse temperature `beta`.
pub fn boltzmann(hamiltonian: &ClassicalHamiltonian, beta: f64) -> Result<BoltzmannTarget> {
    if !beta.is_finite() {
        return Err(invalid(format!("inverse temperature must be finite, got {beta}")));
    }
    BoltzmannTarget::from_energies(hamiltonian.energy_table()?, beta)
}
