use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::propagator::RampPropagator;
use super::spectrum::{PlateauSpectrum, DEGENERACY_TOLERANCE};
use crate::error::{invalid, Error, Result};
use crate::linalg::{symmetry_residual, ComplexMatrix};
use crate::problems::ClassicalHamiltonian;

/// Which protocol produced a proposal matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    /// Fixed-field evolution for time `t`.
    Quench(f64),
    /// Ramp-up, plateau of length `κ`, ramp-down.
    FiniteKappa(f64),
    /// Large-plateau time average.
    TimeAveraged,
    /// Supplied directly by the caller.
    External,
}

/// Row-stochastic symmetric proposal matrix; entry `(y, x)` is `Q(x|y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalMatrix {
    matrix: DMatrix<f64>,
    provenance: Provenance,
}

impl ProposalMatrix {
    /// Wraps a caller-supplied matrix after checking it is square, nonnegative
    /// and row-stochastic.
    pub fn new(matrix: DMatrix<f64>, provenance: Provenance) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), got: matrix.ncols() });
        }
        if matrix.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("proposal entries must be finite and nonnegative"));
        }
        let q = Self { matrix, provenance };
        let residual = q.row_sum_residual();
        if residual > 1e-9 {
            return Err(invalid(format!("proposal rows do not sum to 1 (residual {residual:e})")));
        }
        Ok(q)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `Q(x|y)`.
    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.matrix[(y, x)]
    }

    pub fn row_sum_residual(&self) -> f64 {
        self.matrix.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn symmetry_residual(&self) -> f64 {
        symmetry_residual(&self.matrix)
    }
}

/// Overlaps `W[n][x] = ⟨n|U_1|x⟩` between the ramped basis states and the
/// plateau eigenbasis, from which every large-plateau quantity follows.
///
/// The plateau eigenvalues are grouped into degenerate blocks; the time
/// average of a degenerate block keeps its cross terms, so the result does not
/// depend on the basis the eigensolver picked inside the block.
#[derive(Debug, Clone)]
pub struct RampOverlaps {
    w: ComplexMatrix,
    energies: Vec<f64>,
    blocks: Vec<Range<usize>>,
}

impl RampOverlaps {
    pub fn new(propagator: &RampPropagator, spectrum: &PlateauSpectrum) -> Result<Self> {
        Self::with_tolerance(propagator, spectrum, DEGENERACY_TOLERANCE)
    }

    pub fn with_tolerance(propagator: &RampPropagator, spectrum: &PlateauSpectrum, tol: f64) -> Result<Self> {
        if propagator.dim() != spectrum.dim() {
            return Err(Error::DimensionMismatch { expected: spectrum.dim(), got: propagator.dim() });
        }
        let vt = spectrum.vectors().transpose();
        let w = propagator.unitary().left_mul_real(&vt);
        Ok(Self { w, energies: spectrum.energies().to_vec(), blocks: spectrum.degenerate_blocks(tol) })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `W[n][x] = ⟨n|U_1|x⟩`.
    pub fn overlaps(&self) -> &ComplexMatrix {
        &self.w
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    /// Large-plateau proposal `Q(x|y) = Σ_E |Σ_{n∈E} W[n][x] W[n][y]|^2`, which
    /// reduces to `Σ_n |W[n][x]|^2 |W[n][y]|^2` for a nondegenerate spectrum.
    pub fn time_averaged(&self) -> ProposalMatrix {
        let dim = self.dim();
        let singles: Vec<usize> = self.blocks.iter().filter(|b| b.len() == 1).map(|b| b.start).collect();
        let mut q = if singles.is_empty() {
            DMatrix::zeros(dim, dim)
        } else {
            let m = DMatrix::from_fn(singles.len(), dim, |r, x| {
                let z = self.w.get(singles[r], x);
                z.norm_sqr()
            });
            m.transpose() * m
        };
        for block in self.blocks.iter().filter(|b| b.len() > 1) {
            let wr = self.w.re.rows(block.start, block.len());
            let wi = self.w.im.rows(block.start, block.len());
            let gr = wr.transpose() * wr - wi.transpose() * wi;
            let gi = wr.transpose() * wi + wi.transpose() * wr;
            q += gr.zip_map(&gi, |a, b| a * a + b * b);
        }
        ProposalMatrix { matrix: q, provenance: Provenance::TimeAveraged }
    }

    /// Weighted large-plateau proposal flow `Σ_{x∈from, y∈to} w(x) Q(y|x)`,
    /// evaluated from the overlaps without assembling `Q`.
    pub fn proposal_flow(&self, weights: &[f64], from: &[usize], to: &[usize]) -> Result<f64> {
        let dim = self.dim();
        if weights.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: weights.len() });
        }
        if from.iter().chain(to).any(|&x| x >= dim) {
            return Err(invalid("configuration index out of range"));
        }
        let mut flow = 0.0;
        for block in &self.blocks {
            if block.len() == 1 {
                let n = block.start;
                let out: f64 = from.iter().map(|&x| weights[x] * self.w.get(n, x).norm_sqr()).sum();
                let inn: f64 = to.iter().map(|&y| self.w.get(n, y).norm_sqr()).sum();
                flow += out * inn;
            } else {
                for &x in from {
                    for &y in to {
                        let g: num_complex::Complex64 =
                            block.clone().map(|n| self.w.get(n, x) * self.w.get(n, y)).sum();
                        flow += weights[x] * g.norm_sqr();
                    }
                }
            }
        }
        Ok(flow)
    }

    /// Full protocol unitary `U = U_1^T diag(e^{-i E κ}) U_1` in the
    /// computational basis.
    pub fn protocol_unitary(&self, kappa: f64) -> ComplexMatrix {
        let e0 = self.energies.first().copied().unwrap_or(0.0);
        let mut phased = self.w.clone();
        for (n, e) in self.energies.iter().enumerate() {
            let (s, c) = (-(e - e0) * kappa).sin_cos();
            for x in 0..self.dim() {
                let (a, b) = (self.w.re[(n, x)], self.w.im[(n, x)]);
                phased.re[(n, x)] = a * c - b * s;
                phased.im[(n, x)] = a * s + b * c;
            }
        }
        self.w.transpose().mul(&phased)
    }

    /// Proposal of the protocol with a finite plateau `κ`.
    pub fn finite_kappa(&self, kappa: f64) -> Result<ProposalMatrix> {
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(invalid(format!("plateau duration must be finite and >= 0, got {kappa}")));
        }
        let u = self.protocol_unitary(kappa);
        Ok(ProposalMatrix { matrix: u.abs_squared(), provenance: Provenance::FiniteKappa(kappa) })
    }
}

/// Large-plateau (time-averaged) proposal from `U_1` and the plateau spectrum.
pub fn proposal_time_averaged(propagator: &RampPropagator, spectrum: &PlateauSpectrum) -> Result<ProposalMatrix> {
    Ok(RampOverlaps::new(propagator, spectrum)?.time_averaged())
}

/// Finite-plateau proposal.
pub fn proposal_finite_kappa(
    propagator: &RampPropagator,
    spectrum: &PlateauSpectrum,
    kappa: f64,
) -> Result<ProposalMatrix> {
    RampOverlaps::new(propagator, spectrum)?.finite_kappa(kappa)
}

/// `Q(x|y) = |⟨x|e^{-iHt}|y⟩|^2` under the plateau Hamiltonian.
pub fn proposal_quench_from_spectrum(spectrum: &PlateauSpectrum, t: f64) -> Result<ProposalMatrix> {
    if !t.is_finite() || t < 0.0 {
        return Err(invalid(format!("evolution time must be finite and >= 0, got {t}")));
    }
    let v = spectrum.vectors();
    let e0 = spectrum.energies().first().copied().unwrap_or(0.0);
    let mut vc = v.clone();
    let mut vs = v.clone();
    for (n, e) in spectrum.energies().iter().enumerate() {
        let (s, c) = ((e - e0) * t).sin_cos();
        vc.column_mut(n).scale_mut(c);
        vs.column_mut(n).scale_mut(s);
    }
    let u = ComplexMatrix { re: &vc * v.transpose(), im: -(&vs * v.transpose()) };
    Ok(ProposalMatrix { matrix: u.abs_squared(), provenance: Provenance::Quench(t) })
}

pub fn proposal_quench(hamiltonian: &ClassicalHamiltonian, field: f64, t: f64) -> Result<ProposalMatrix> {
    let spectrum = super::spectrum::plateau_spectrum(hamiltonian, field)?;
    proposal_quench_from_spectrum(&spectrum, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{sample_sk, RampSchedule};
    use crate::quantum::{plateau_spectrum, ramp_propagator};

    #[test]
    fn quench_limit_matches_direct_overlaps() {
        let h = sample_sk(2, 5).unwrap();
        let spec = plateau_spectrum(&h, 1.5).unwrap();
        let u = RampPropagator::identity(4);
        let q = proposal_time_averaged(&u, &spec).unwrap();
        let v = spec.vectors();
        for x in 0..4 {
            for y in 0..4 {
                let direct: f64 = (0..4).map(|n| v[(x, n)].powi(2) * v[(y, n)].powi(2)).sum();
                assert!((q.prob(x, y) - direct).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn time_averaged_rows_sum_to_one() {
        let h = sample_sk(6, 8).unwrap();
        let spec = plateau_spectrum(&h, 1.5).unwrap();
        let u = ramp_propagator(&h, 1.5, &RampSchedule::sin2(3.0).unwrap(), 64).unwrap();
        let q = proposal_time_averaged(&u, &spec).unwrap();
        assert!(q.row_sum_residual() < 1e-9);
        assert!(q.symmetry_residual() < 1e-12);
        assert!(q.matrix().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn degenerate_ising_rows_sum_to_one() {
        let h = ClassicalHamiltonian::ising_chain(6).unwrap();
        let spec = plateau_spectrum(&h, 1.5).unwrap();
        let u = ramp_propagator(&h, 1.5, &RampSchedule::sin2(2.0).unwrap(), 64).unwrap();
        let q = proposal_time_averaged(&u, &spec).unwrap();
        assert!(q.row_sum_residual() < 1e-9);
        assert!(q.symmetry_residual() < 1e-12);
    }

    #[test]
    fn adiabatic_limit_stays_put() {
        // weak couplings and well separated fields keep every level gapped along the ramp
        let couplings = vec![
            crate::problems::PairCoupling { i: 0, j: 1, value: 0.05 },
            crate::problems::PairCoupling { i: 1, j: 2, value: -0.04 },
            crate::problems::PairCoupling { i: 2, j: 3, value: 0.03 },
        ];
        let h = ClassicalHamiltonian::sk(4, couplings, vec![0.3, 0.55, 0.8, 1.1]).unwrap();
        let spec = plateau_spectrum(&h, 1.5).unwrap();
        let u = ramp_propagator(&h, 1.5, &RampSchedule::sin2(200.0).unwrap(), 64).unwrap();
        let q = proposal_time_averaged(&u, &spec).unwrap();
        let min_diag = (0..16).map(|x| q.prob(x, x)).fold(f64::INFINITY, f64::min);
        assert!(min_diag >= 0.9, "min diagonal {min_diag}");
        let short = ramp_propagator(&h, 1.5, &RampSchedule::sin2(10.0).unwrap(), 64).unwrap();
        let q_short = proposal_time_averaged(&short, &spec).unwrap();
        let min_short = (0..16).map(|x| q_short.prob(x, x)).fold(f64::INFINITY, f64::min);
        assert!(min_short < min_diag);
    }

    #[test]
    fn zero_plateau_zero_ramp_is_identity() {
        let h = sample_sk(3, 4).unwrap();
        let spec = plateau_spectrum(&h, 1.5).unwrap();
        let q = proposal_finite_kappa(&RampPropagator::identity(8), &spec, 0.0).unwrap();
        for x in 0..8 {
            for y in 0..8 {
                let want = if x == y { 1.0 } else { 0.0 };
                assert!((q.prob(x, y) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn finite_kappa_is_symmetric() {
        let h = sample_sk(5, 12).unwrap();
        let spec = plateau_spectrum(&h, 1.5).unwrap();
        let u = ramp_propagator(&h, 1.5, &RampSchedule::sin2(2.0).unwrap(), 64).unwrap();
        let q = proposal_finite_kappa(&u, &spec, 37.3).unwrap();
        assert!(q.symmetry_residual() < 1e-8);
        assert!(q.row_sum_residual() < 1e-9);
    }

    #[test]
    fn quench_proposals() {
        let h = ClassicalHamiltonian::ising_chain(3).unwrap();
        let q0 = proposal_quench(&h, 1.5, 0.0).unwrap();
        for x in 0..8 {
            assert!((q0.prob(x, x) - 1.0).abs() < 1e-12);
        }
        let q = proposal_quench(&h, 1.5, 10.0).unwrap();
        assert!(q.row_sum_residual() < 1e-9);
        assert!(q.symmetry_residual() < 1e-8);
        assert!(proposal_quench(&h, 1.5, -1.0).is_err());
    }

    #[test]
    fn external_proposals_are_validated() {
        let bad = DMatrix::from_row_slice(2, 2, &[0.5, 0.6, 0.5, 0.5]);
        assert!(ProposalMatrix::new(bad, Provenance::External).is_err());
        let good = DMatrix::from_element(2, 2, 0.5);
        assert!(ProposalMatrix::new(good, Provenance::External).is_ok());
    }
}
