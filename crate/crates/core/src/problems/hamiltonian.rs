use serde::{Deserialize, Serialize};

use super::spin::{dimension, spin_of, SpinConfiguration, MAX_SITES};
use crate::error::{invalid, Error, Result};

/// Two-body coupling `J_ij s_i s_j` with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCoupling {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Three-body coupling `J_ijk s_i s_j s_k` with `i < j < k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleCoupling {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub value: f64,
}

/// Classical spin Hamiltonians diagonal in the `σ^z` basis.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassicalHamiltonian {
    /// `-Σ_i s_i s_{i+1}` with periodic boundary.
    IsingChain { n: usize },
    /// `Σ_{i<j} J_ij s_i s_j + Σ_i h_i s_i`.
    Sk { n: usize, couplings: Vec<PairCoupling>, fields: Vec<f64> },
    /// `Σ_{i<j<k} J_ijk s_i s_j s_k`.
    ThreeSpin { n: usize, couplings: Vec<TripleCoupling> },
}

impl ClassicalHamiltonian {
    pub fn ising_chain(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid("Ising chain needs N >= 2"));
        }
        check_sites(n)?;
        Ok(Self::IsingChain { n })
    }

    pub fn sk(n: usize, couplings: Vec<PairCoupling>, fields: Vec<f64>) -> Result<Self> {
        check_sites(n)?;
        if fields.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: fields.len() });
        }
        let mut seen = std::collections::HashSet::new();
        for c in &couplings {
            if !(c.i < c.j && c.j < n) {
                return Err(invalid(format!("pair coupling ({}, {}) is not strictly upper-triangular", c.i, c.j)));
            }
            if !seen.insert((c.i, c.j)) {
                return Err(invalid(format!("duplicate pair coupling ({}, {})", c.i, c.j)));
            }
        }
        Ok(Self::Sk { n, couplings, fields })
    }

    pub fn three_spin(n: usize, couplings: Vec<TripleCoupling>) -> Result<Self> {
        check_sites(n)?;
        let mut seen = std::collections::HashSet::new();
        for c in &couplings {
            if !(c.i < c.j && c.j < c.k && c.k < n) {
                return Err(invalid(format!("triple coupling ({}, {}, {}) is not strictly ordered", c.i, c.j, c.k)));
            }
            if !seen.insert((c.i, c.j, c.k)) {
                return Err(invalid(format!("duplicate triple coupling ({}, {}, {})", c.i, c.j, c.k)));
            }
        }
        Ok(Self::ThreeSpin { n, couplings })
    }

    pub fn n(&self) -> usize {
        match self {
            Self::IsingChain { n } | Self::Sk { n, .. } | Self::ThreeSpin { n, .. } => *n,
        }
    }

    pub fn model_name(&self) -> &'static str {
        match self {
            Self::IsingChain { .. } => "ising",
            Self::Sk { .. } => "sk",
            Self::ThreeSpin { .. } => "3spin",
        }
    }

    pub fn energy(&self, x: SpinConfiguration) -> Result<f64> {
        if x.n() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: x.n() });
        }
        Ok(self.energy_of_index(x.index()))
    }

    /// Energy of configuration `index`, without range checks.
    pub fn energy_of_index(&self, index: usize) -> f64 {
        match self {
            Self::IsingChain { n } => {
                let n = *n;
                let mask = (1usize << n) - 1;
                let rotated = ((index >> 1) | (index << (n - 1))) & mask;
                let broken = ((index ^ rotated) & mask).count_ones() as f64;
                -(n as f64) + 2.0 * broken
            }
            Self::Sk { couplings, fields, .. } => {
                let mut e = 0.0;
                for c in couplings {
                    let parity = ((index >> c.i) ^ (index >> c.j)) & 1;
                    e += if parity == 0 { c.value } else { -c.value };
                }
                for (i, h) in fields.iter().enumerate() {
                    e += f64::from(spin_of(index, i)) * h;
                }
                e
            }
            Self::ThreeSpin { couplings, .. } => {
                let mut e = 0.0;
                for c in couplings {
                    let parity = ((index >> c.i) ^ (index >> c.j) ^ (index >> c.k)) & 1;
                    e += if parity == 0 { c.value } else { -c.value };
                }
                e
            }
        }
    }

    /// Energies of all `2^N` configurations, indexed by configuration.
    pub fn energy_table(&self) -> Result<Vec<f64>> {
        self.energy_table_with_cap(MAX_SITES)
    }

    pub fn energy_table_with_cap(&self, cap: usize) -> Result<Vec<f64>> {
        let n = self.n();
        if n > cap {
            return Err(Error::SizeCap { n, cap, what: "energy table" });
        }
        Ok((0..dimension(n)).map(|x| self.energy_of_index(x)).collect())
    }
}

fn check_sites(n: usize) -> Result<()> {
    if n == 0 || n > 63 {
        return Err(invalid(format!("site count {n} must be in 1..=63")));
    }
    Ok(())
}

/// Groups sorted distinct energies with an absolute tolerance and returns the
/// level values in ascending order.
pub fn energy_levels(table: &[f64], tol: f64) -> Vec<f64> {
    let mut sorted: Vec<f64> = table.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut levels: Vec<f64> = Vec::new();
    for e in sorted {
        match levels.last() {
            Some(&last) if (e - last).abs() <= tol => {}
            _ => levels.push(e),
        }
    }
    levels
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(spins: &[i8]) -> SpinConfiguration {
        SpinConfiguration::from_spins(spins).unwrap()
    }

    #[test]
    fn ising_chain_reference_energies() {
        let h = ClassicalHamiltonian::ising_chain(4).unwrap();
        assert_eq!(h.energy(cfg(&[1, 1, 1, 1])).unwrap(), -4.0);
        assert_eq!(h.energy(cfg(&[1, -1, 1, -1])).unwrap(), 4.0);
        let h8 = ClassicalHamiltonian::ising_chain(8).unwrap();
        let single = SpinConfiguration::new(0, 8).unwrap().flipped(3);
        assert_eq!(h8.energy(single).unwrap(), -4.0);
    }

    #[test]
    fn ising_two_sites_double_counts_the_bond() {
        let h = ClassicalHamiltonian::ising_chain(2).unwrap();
        assert_eq!(h.energy_table().unwrap(), vec![-2.0, 2.0, 2.0, -2.0]);
    }

    #[test]
    fn ising_levels_are_spaced_by_four() {
        let h = ClassicalHamiltonian::ising_chain(6).unwrap();
        let levels = energy_levels(&h.energy_table().unwrap(), 1e-9);
        for (k, e) in levels.iter().enumerate() {
            assert_eq!(*e, -6.0 + 4.0 * k as f64);
        }
    }

    #[test]
    fn sk_matches_term_by_term_sum() {
        let couplings = vec![
            PairCoupling { i: 0, j: 1, value: 0.3 },
            PairCoupling { i: 0, j: 2, value: -1.1 },
            PairCoupling { i: 1, j: 2, value: 0.7 },
        ];
        let fields = vec![0.1, -0.2, 0.05];
        let h = ClassicalHamiltonian::sk(3, couplings.clone(), fields.clone()).unwrap();
        for idx in 0..8 {
            let x = SpinConfiguration::new(idx, 3).unwrap();
            let s: Vec<f64> = x.spins().iter().map(|&v| f64::from(v)).collect();
            let mut oracle = 0.0;
            for c in &couplings {
                oracle += c.value * s[c.i] * s[c.j];
            }
            for i in 0..3 {
                oracle += fields[i] * s[i];
            }
            assert!((h.energy(x).unwrap() - oracle).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_sk_table_is_zero() {
        let couplings = vec![PairCoupling { i: 0, j: 1, value: 0.0 }];
        let h = ClassicalHamiltonian::sk(2, couplings, vec![0.0, 0.0]).unwrap();
        assert!(h.energy_table().unwrap().iter().all(|&e| e == 0.0));
    }

    #[test]
    fn rejects_malformed_couplings() {
        let bad = vec![PairCoupling { i: 1, j: 1, value: 1.0 }];
        assert!(ClassicalHamiltonian::sk(2, bad, vec![0.0; 2]).is_err());
        let dup = vec![PairCoupling { i: 0, j: 1, value: 1.0 }, PairCoupling { i: 0, j: 1, value: 2.0 }];
        assert!(ClassicalHamiltonian::sk(2, dup, vec![0.0; 2]).is_err());
        let bad3 = vec![TripleCoupling { i: 0, j: 2, k: 1, value: 1.0 }];
        assert!(ClassicalHamiltonian::three_spin(3, bad3).is_err());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let h = ClassicalHamiltonian::ising_chain(4).unwrap();
        let x = SpinConfiguration::new(0, 3).unwrap();
        assert!(matches!(h.energy(x), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn energy_table_cap_names_the_cap() {
        let h = ClassicalHamiltonian::ising_chain(21).unwrap();
        let err = h.energy_table().unwrap_err();
        assert!(err.to_string().contains("20"));
    }
}
