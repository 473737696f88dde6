//! Seeded spin-glass ensembles and their JSON instance records.
//!
//! Each instance is generated by a ChaCha8 stream seeded with a 64-bit instance
//! seed. Gaussian couplings are drawn with `rand_distr::StandardNormal` in
//! lexicographic index order and scaled to the target variance; SK fields follow
//! the couplings in site order. Instance seeds are derived from a master seed by
//! a SplitMix64 step over `(master, instance index)`, so any single instance of a
//! sweep can be regenerated in isolation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use super::hamiltonian::{ClassicalHamiltonian, PairCoupling, TripleCoupling};
use crate::error::{invalid, Error, Result};

/// Half-width of the uniform SK symmetry-breaking field distribution.
pub const SK_FIELD_HALF_WIDTH: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisorderModel {
    Sk,
    #[serde(rename = "3spin")]
    ThreeSpin,
}

impl DisorderModel {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Sk => "sk",
            Self::ThreeSpin => "3spin",
        }
    }
}

impl std::str::FromStr for DisorderModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sk" => Ok(Self::Sk),
            "3spin" | "three-spin" | "threespin" | "3-spin" => Ok(Self::ThreeSpin),
            other => Err(invalid(format!("unknown disorder model '{other}'"))),
        }
    }
}

/// A reproducible disorder ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub model: DisorderModel,
    pub n: usize,
    /// Master seed; instance seeds are derived from it.
    pub seed: u64,
    pub instances: usize,
}

impl DisorderSpec {
    pub fn new(model: DisorderModel, n: usize, seed: u64, instances: usize) -> Self {
        Self { model, n, seed, instances }
    }

    pub fn instance_seed(&self, instance: usize) -> u64 {
        instance_seed(self.seed, instance as u64)
    }

    pub fn instance_seeds(&self) -> Vec<u64> {
        (0..self.instances).map(|i| self.instance_seed(i)).collect()
    }

    pub fn sample(&self, instance_seed: u64) -> Result<ClassicalHamiltonian> {
        match self.model {
            DisorderModel::Sk => sample_sk(self.n, instance_seed),
            DisorderModel::ThreeSpin => sample_3spin(self.n, instance_seed),
        }
    }
}

/// SplitMix64 finalizer applied to the master seed offset by the instance index.
pub fn instance_seed(master: u64, instance: u64) -> u64 {
    let mut z = master.wrapping_add(instance.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SK instance: `J_ij ~ N(0, 1/N)`, `h_i ~ U[-0.25, 0.25]`.
pub fn sample_sk(n: usize, seed: u64) -> Result<ClassicalHamiltonian> {
    if n < 2 {
        return Err(invalid(format!("SK model needs N >= 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (1.0 / n as f64).sqrt();
    let mut couplings = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let z: f64 = rng.sample(StandardNormal);
            couplings.push(PairCoupling { i, j, value: scale * z });
        }
    }
    let uniform =
        Uniform::new_inclusive(-SK_FIELD_HALF_WIDTH, SK_FIELD_HALF_WIDTH).map_err(|e| invalid(e.to_string()))?;
    let fields = (0..n).map(|_| rng.sample(uniform)).collect();
    ClassicalHamiltonian::sk(n, couplings, fields)
}

/// 3-spin instance: `J_ijk ~ N(0, 3/N^2)`.
pub fn sample_3spin(n: usize, seed: u64) -> Result<ClassicalHamiltonian> {
    if n < 3 {
        return Err(invalid(format!("3-spin model needs N >= 3, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 3.0f64.sqrt() / n as f64;
    let mut couplings = Vec::with_capacity(n * (n - 1) * (n - 2) / 6);
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let z: f64 = rng.sample(StandardNormal);
                couplings.push(TripleCoupling { i, j, k, value: scale * z });
            }
        }
    }
    ClassicalHamiltonian::three_spin(n, couplings)
}

/// Flattened couplings: one index list per coupling plus the matching values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingList {
    pub indices: Vec<Vec<usize>>,
    pub values: Vec<f64>,
}

/// JSON record of a single Hamiltonian instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub model: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: Option<u64>,
    pub couplings: CouplingList,
    pub fields: Vec<f64>,
}

impl InstanceRecord {
    pub fn from_hamiltonian(h: &ClassicalHamiltonian, seed: Option<u64>) -> Self {
        let (indices, values, fields) = match h {
            ClassicalHamiltonian::IsingChain { .. } => (Vec::new(), Vec::new(), Vec::new()),
            ClassicalHamiltonian::Sk { couplings, fields, .. } => (
                couplings.iter().map(|c| vec![c.i, c.j]).collect(),
                couplings.iter().map(|c| c.value).collect(),
                fields.clone(),
            ),
            ClassicalHamiltonian::ThreeSpin { couplings, .. } => (
                couplings.iter().map(|c| vec![c.i, c.j, c.k]).collect(),
                couplings.iter().map(|c| c.value).collect(),
                Vec::new(),
            ),
        };
        Self { model: h.model_name().to_string(), n: h.n(), seed, couplings: CouplingList { indices, values }, fields }
    }

    pub fn to_hamiltonian(&self) -> Result<ClassicalHamiltonian> {
        let c = &self.couplings;
        if c.indices.len() != c.values.len() {
            return Err(Error::DimensionMismatch { expected: c.indices.len(), got: c.values.len() });
        }
        match self.model.as_str() {
            "ising" => ClassicalHamiltonian::ising_chain(self.n),
            "sk" => {
                let mut pairs = Vec::with_capacity(c.values.len());
                for (idx, &value) in c.indices.iter().zip(&c.values) {
                    match idx.as_slice() {
                        [i, j] => pairs.push(PairCoupling { i: *i, j: *j, value }),
                        _ => return Err(invalid("SK couplings need two indices each")),
                    }
                }
                let fields = if self.fields.is_empty() { vec![0.0; self.n] } else { self.fields.clone() };
                ClassicalHamiltonian::sk(self.n, pairs, fields)
            }
            "3spin" => {
                let mut triples = Vec::with_capacity(c.values.len());
                for (idx, &value) in c.indices.iter().zip(&c.values) {
                    match idx.as_slice() {
                        [i, j, k] => triples.push(TripleCoupling { i: *i, j: *j, k: *k, value }),
                        _ => return Err(invalid("3-spin couplings need three indices each")),
                    }
                }
                ClassicalHamiltonian::three_spin(self.n, triples)
            }
            other => Err(invalid(format!("unknown model '{other}' in instance record"))),
        }
    }
}
