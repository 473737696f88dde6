//! Metropolis-Hastings chains built from symmetric proposals, their spectral
//! gaps and the mixing-time bounds that follow.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::problems::BoltzmannTarget;
use crate::quantum::ProposalMatrix;

/// Proposal asymmetry above which the Metropolis ratio would need `Q(y|x)/Q(x|y)`.
pub const PROPOSAL_SYMMETRY_TOLERANCE: f64 = 1e-6;

/// Largest detailed-balance violation accepted by [`spectral_gap`].
pub const REVERSIBILITY_TOLERANCE: f64 = 1e-8;

/// Row-stochastic transition matrix; entry `(y, x)` is `P(y, x)`, the
/// probability of moving from `y` to `x`.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    matrix: DMatrix<f64>,
    target: BoltzmannTarget,
}

impl TransitionMatrix {
    /// Wraps an explicit matrix; rows must be nonnegative and sum to 1.
    pub fn new(matrix: DMatrix<f64>, target: BoltzmannTarget) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() != target.len() {
            return Err(Error::DimensionMismatch { expected: target.len(), got: matrix.nrows() });
        }
        if matrix.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("transition entries must be finite and nonnegative"));
        }
        let p = Self { matrix, target };
        let residual = p.row_sum_residual();
        if residual > 1e-9 {
            return Err(invalid(format!("transition rows do not sum to 1 (residual {residual:e})")));
        }
        Ok(p)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn target(&self) -> &BoltzmannTarget {
        &self.target
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `P(from, to)`.
    #[inline]
    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.matrix[(from, to)]
    }

    pub fn row_sum_residual(&self) -> f64 {
        self.matrix.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `max_{x,y} |π(x) P(x,y) - π(y) P(y,x)|`.
    pub fn detailed_balance_residual(&self) -> f64 {
        let pi = self.target.probabilities();
        let mut worst = 0.0f64;
        for x in 0..self.dim() {
            for y in (x + 1)..self.dim() {
                worst = worst.max((pi[x] * self.matrix[(x, y)] - pi[y] * self.matrix[(y, x)]).abs());
            }
        }
        worst
    }

    /// `‖πP - π‖_∞`.
    pub fn stationarity_residual(&self) -> f64 {
        let pi = self.target.probabilities();
        let mut worst = 0.0f64;
        for x in 0..self.dim() {
            let flow_in: f64 = (0..self.dim()).map(|y| pi[y] * self.matrix[(y, x)]).sum();
            worst = worst.max((flow_in - pi[x]).abs());
        }
        worst
    }
}

/// `P(y,x) = Q(x|y) min(1, π(x)/π(y))` for `x ≠ y`; the diagonal keeps the
/// rejected mass.
pub fn metropolis_transition(proposal: &ProposalMatrix, target: &BoltzmannTarget) -> Result<TransitionMatrix> {
    let dim = proposal.dim();
    if dim != target.len() {
        return Err(Error::DimensionMismatch { expected: target.len(), got: dim });
    }
    let asym = proposal.symmetry_residual();
    if asym > PROPOSAL_SYMMETRY_TOLERANCE {
        return Err(Error::AsymmetricProposal { residual: asym });
    }
    let logp = target.log_probabilities();
    let mut p = DMatrix::zeros(dim, dim);
    for y in 0..dim {
        let mut moved = 0.0;
        for x in 0..dim {
            if x == y {
                continue;
            }
            let acceptance = (logp[x] - logp[y]).min(0.0).exp();
            let v = proposal.prob(x, y) * acceptance;
            p[(y, x)] = v;
            moved += v;
        }
        let stay = 1.0 - moved;
        p[(y, y)] = if stay >= 0.0 {
            stay
        } else if stay > -1e-12 {
            log::debug!("clamped diagonal P({y},{y}) = {stay:e} to zero");
            0.0
        } else {
            return Err(Error::Numerical(format!("negative rejection mass {stay:e} at state {y}")));
        };
    }
    Ok(TransitionMatrix { matrix: p, target: target.clone() })
}

/// Spectral gap and diagnostics of a reversible chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapResult {
    /// `1 - |λ_2|`.
    pub delta: f64,
    /// Largest eigenvalue magnitude apart from the unit eigenvalue.
    pub lambda2: f64,
    /// Ascending spectrum, when requested.
    pub eigenvalues: Option<Vec<f64>>,
    pub stationarity_residual: f64,
    pub detailed_balance_residual: f64,
}

/// Spectral gap via the symmetrized matrix `D^{1/2} P D^{-1/2}`, `D = diag(π)`.
pub fn spectral_gap(chain: &TransitionMatrix) -> Result<GapResult> {
    spectral_gap_with(chain, false)
}

pub fn spectral_gap_with(chain: &TransitionMatrix, keep_spectrum: bool) -> Result<GapResult> {
    let detailed_balance_residual = chain.detailed_balance_residual();
    if detailed_balance_residual > REVERSIBILITY_TOLERANCE {
        return Err(Error::NotReversible { residual: detailed_balance_residual });
    }
    let dim = chain.dim();
    let logp = chain.target().log_probabilities();
    let p = chain.matrix();
    let mut s = DMatrix::zeros(dim, dim);
    for x in 0..dim {
        s[(x, x)] = p[(x, x)];
        for y in (x + 1)..dim {
            let forward = p[(x, y)] * (0.5 * (logp[x] - logp[y])).exp();
            let backward = p[(y, x)] * (0.5 * (logp[y] - logp[x])).exp();
            let v = 0.5 * (forward + backward);
            s[(x, y)] = v;
            s[(y, x)] = v;
        }
    }
    let mut eigenvalues: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let unit = eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - 1.0).abs().total_cmp(&(b.1 - 1.0).abs()))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Numerical("empty spectrum".into()))?;
    if (eigenvalues[unit] - 1.0).abs() > 1e-8 {
        return Err(Error::Numerical(format!("no unit eigenvalue (closest {})", eigenvalues[unit])));
    }
    let lambda2 =
        eigenvalues.iter().enumerate().filter(|(i, _)| *i != unit).map(|(_, v)| v.abs()).fold(0.0f64, f64::max);
    Ok(GapResult {
        delta: (1.0 - lambda2).clamp(0.0, 1.0),
        lambda2,
        eigenvalues: keep_spectrum.then_some(eigenvalues),
        stationarity_residual: chain.stationarity_residual(),
        detailed_balance_residual,
    })
}

/// Lower and upper bounds on the `ε`-mixing time from the spectral gap.
pub fn mixing_time_bounds(delta: f64, pi_min: f64, epsilon: f64) -> Result<(f64, f64)> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid(format!("gap must lie in (0, 1], got {delta}")));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(invalid(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    if !(pi_min > 0.0 && pi_min <= 1.0) {
        return Err(invalid(format!("pi_min must lie in (0, 1], got {pi_min}")));
    }
    let lower = (1.0 / delta - 1.0) * (1.0 / (2.0 * epsilon)).ln();
    let upper = (1.0 / delta) * (1.0 / (epsilon * pi_min)).ln();
    Ok((lower, upper))
}
