//! Ramped transverse-field evolution and the proposal matrices it induces.

mod propagator;
mod proposal;
mod spectrum;

pub use propagator::{protocol_propagator, ramp_propagator, RampPropagator, DEFAULT_STEPS_PER_UNIT_TIME};
pub use proposal::{
    proposal_finite_kappa, proposal_quench, proposal_quench_from_spectrum, proposal_time_averaged, ProposalMatrix,
    Provenance, RampOverlaps,
};
pub use spectrum::{diagonalize_plateau, plateau_hamiltonian, plateau_spectrum, PlateauSpectrum, DEGENERACY_TOLERANCE};
