//! Classical Hamiltonians, Boltzmann targets, disorder ensembles and ramp schedules.

mod boltzmann;
mod disorder;
mod hamiltonian;
mod schedule;
mod spin;

pub use boltzmann::{boltzmann, BoltzmannTarget};
pub use disorder::{
    instance_seed, sample_3spin, sample_sk, CouplingList, DisorderModel, DisorderSpec, InstanceRecord,
    SK_FIELD_HALF_WIDTH,
};
pub use hamiltonian::{energy_levels, ClassicalHamiltonian, PairCoupling, TripleCoupling};
pub use schedule::{ramp_value, Kappa, RampKind, RampSchedule};
pub use spin::{dimension, spin_of, SpinConfiguration, MAX_DENSE_SITES, MAX_SITES};

/// Absolute tolerance used when grouping classical energies into levels.
pub const LEVEL_TOLERANCE: f64 = 1e-9;
