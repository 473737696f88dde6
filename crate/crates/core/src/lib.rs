//! Quantum-enhanced Markov chain Monte Carlo with adiabatically dressed
//! proposals.
//!
//! The crate builds classical spin Hamiltonians and their Boltzmann targets,
//! integrates the ramped transverse-field evolution that generates quantum
//! proposals, assembles the resulting Metropolis-Hastings chains, and measures
//! how fast they mix: exact spectral gaps, bottleneck (conductance) bounds, a
//! free-fermion bound for the periodic Ising chain, disorder averages and
//! scaling fits.
//!
//! Configurations are integers in `[0, 2^N)`; bit `b` set means spin `b` is
//! down. All evolutions use `ħ = 1`.

pub mod analysis;
pub mod bottleneck;
pub mod chain;
pub mod error;
pub mod freefermion;
pub mod linalg;
pub mod problems;
pub mod quantum;

pub use error::{Error, Result};
