//! Conductance-style upper bounds on the spectral gap from equilibrium flows
//! across configuration-space cuts.

use serde::{Deserialize, Serialize};

use crate::chain::TransitionMatrix;
use crate::error::{Error, Result};
use crate::problems::{energy_levels, BoltzmannTarget, ClassicalHamiltonian, LEVEL_TOLERANCE};
use crate::quantum::RampOverlaps;

/// A labelled set of configuration indices, kept sorted and duplicate free.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetSelector {
    indices: Vec<usize>,
    total: usize,
    label: String,
}

impl SubsetSelector {
    pub fn from_indices(mut indices: Vec<usize>, total: usize, label: impl Into<String>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if indices.last().is_some_and(|&x| x >= total) {
            return Err(crate::error::invalid(format!("subset index out of range for {total} configurations")));
        }
        Ok(Self { indices, total, label: label.into() })
    }

    /// Evaluates `pred` once per configuration.
    pub fn from_predicate(total: usize, mut pred: impl FnMut(usize) -> bool, label: impl Into<String>) -> Self {
        Self { indices: (0..total).filter(|&x| pred(x)).collect(), total, label: label.into() }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.indices.binary_search(&x).is_ok()
    }

    pub fn complement(&self) -> Self {
        let mut mask = vec![true; self.total];
        for &x in &self.indices {
            mask[x] = false;
        }
        Self {
            indices: (0..self.total).filter(|&x| mask[x]).collect(),
            total: self.total,
            label: format!("complement of {}", self.label),
        }
    }

    /// Errors unless the set is neither empty nor the full space.
    pub fn ensure_proper(&self) -> Result<()> {
        if self.indices.is_empty() || self.indices.len() >= self.total {
            return Err(Error::ImproperSubset { size: self.indices.len(), total: self.total });
        }
        Ok(())
    }

    fn ensure_fits(&self, dim: usize) -> Result<()> {
        if self.total != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.total });
        }
        self.ensure_proper()
    }
}

/// Equilibrium flow `E(S, S^c) = Σ_{x∈S, y∉S} π(x) P(x, y)`.
pub fn equilibrium_flow(chain: &TransitionMatrix, subset: &SubsetSelector) -> Result<f64> {
    subset.ensure_fits(chain.dim())?;
    let pi = chain.target().probabilities();
    let outside = subset.complement();
    Ok(subset.indices().iter().map(|&x| pi[x] * outside.indices().iter().map(|&y| chain.prob(x, y)).sum::<f64>()).sum())
}

/// `Λ(B) = E(B, B^c) / (π(B) π(B^c))`, an upper bound on the spectral gap.
///
/// If `π(B) > 1/2` the complement is used instead.
pub fn lambda_bound(chain: &TransitionMatrix, subset: &SubsetSelector) -> Result<f64> {
    subset.ensure_fits(chain.dim())?;
    let target = chain.target();
    let mass = target.mass(subset.indices());
    let (set, mass) = if mass > 0.5 {
        log::info!("subset '{}' carries mass {mass} > 1/2; bounding with its complement", subset.label());
        let c = subset.complement();
        let m = target.mass(c.indices());
        (c, m)
    } else {
        (subset.clone(), mass)
    };
    let flow = equilibrium_flow(chain, &set)?;
    normalized(flow, mass)
}

fn normalized(flow: f64, mass: f64) -> Result<f64> {
    let denom = mass * (1.0 - mass);
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::Numerical(format!("subset mass {mass} leaves no room for a cut")));
    }
    Ok(flow / denom)
}

/// Configurations whose energy is the `k`-th distinct level (ascending).
pub fn energy_manifold(hamiltonian: &ClassicalHamiltonian, k: usize) -> Result<SubsetSelector> {
    let table = hamiltonian.energy_table()?;
    manifold_from_table(&table, k)
}

/// As [`energy_manifold`], from a precomputed energy table.
pub fn manifold_from_table(table: &[f64], k: usize) -> Result<SubsetSelector> {
    let levels = energy_levels(table, LEVEL_TOLERANCE);
    let level = *levels.get(k).ok_or(Error::LevelOutOfRange { k, levels: levels.len() })?;
    Ok(SubsetSelector::from_predicate(
        table.len(),
        |x| (table[x] - level).abs() <= LEVEL_TOLERANCE,
        format!("energy manifold {k}"),
    ))
}

/// `Λ(B)` of the large-plateau protocol evaluated from the ramp overlaps,
/// counting every proposed move out of `B` as accepted.
///
/// This is the proposal flow out of `B` normalized by `π(B) π(B^c)`; it equals
/// [`lambda_bound`] on the assembled Metropolis chain whenever every move from
/// `B` to `B^c` is downhill, and is otherwise a proposal-flow diagnostic.
pub fn ramped_lambda_from_overlaps(
    overlaps: &RampOverlaps,
    target: &BoltzmannTarget,
    subset: &SubsetSelector,
) -> Result<f64> {
    subset.ensure_fits(overlaps.dim())?;
    if target.len() != overlaps.dim() {
        return Err(Error::DimensionMismatch { expected: overlaps.dim(), got: target.len() });
    }
    let flow = overlaps.proposal_flow(target.probabilities(), subset.indices(), subset.complement().indices())?;
    normalized(flow, target.mass(subset.indices()))
}

/// `Λ(B)` of the large-plateau protocol restricted to the flow from `B` into
/// `into ⊆ B^c`, normalized by `π(B) π(B^c)`.
///
/// When `into` holds the configurations of `B^c` that lie below every member
/// of `B` (e.g. `B` the first excited manifold and `into` the ground
/// manifold), these moves are always accepted and the result is their exact
/// contribution to [`lambda_bound`] on the assembled chain; the remaining
/// uphill flow is suppressed by the Boltzmann factor.
pub fn ramped_lambda_into(
    overlaps: &RampOverlaps,
    target: &BoltzmannTarget,
    subset: &SubsetSelector,
    into: &SubsetSelector,
) -> Result<f64> {
    subset.ensure_fits(overlaps.dim())?;
    if into.total() != overlaps.dim() || into.indices().iter().any(|&y| subset.contains(y)) {
        return Err(crate::error::invalid("the receiving set must lie in the complement of the subset"));
    }
    if target.len() != overlaps.dim() {
        return Err(Error::DimensionMismatch { expected: overlaps.dim(), got: target.len() });
    }
    let flow = overlaps.proposal_flow(target.probabilities(), subset.indices(), into.indices())?;
    normalized(flow, target.mass(subset.indices()))
}
