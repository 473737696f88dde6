//! Split-step integration of `H(t) = H_c + γ(t) h Σ σ^x`.
//!
//! Each step of length `dt` applies `exp(-i dt/2 H_c)`, then the transverse
//! field at the step midpoint as `N` independent single-site rotations, then
//! `exp(-i dt/2 H_c)` again. Adjacent half-step phases are fused. States are
//! propagated in batches of [`LANES`] vectors laid out lane-innermost so that
//! the pairwise bit mixing vectorizes.

use crate::error::{invalid, Error, Result};
use crate::linalg::ComplexMatrix;
use crate::problems::{dimension, ClassicalHamiltonian, RampSchedule, MAX_DENSE_SITES};

const LANES: usize = 8;

/// Per-configuration `(cos, sin)` of a diagonal phase.
type Phases = Vec<(f64, f64)>;

/// Default integration resolution.
pub const DEFAULT_STEPS_PER_UNIT_TIME: usize = 64;

/// Ramp-segment evolution operator `U_1`.
#[derive(Debug, Clone)]
pub struct RampPropagator {
    unitary: ComplexMatrix,
    steps: usize,
    alpha: f64,
}

impl RampPropagator {
    pub fn identity(dim: usize) -> Self {
        Self { unitary: ComplexMatrix::identity(dim), steps: 0, alpha: 0.0 }
    }

    pub fn from_unitary(unitary: ComplexMatrix, steps: usize, alpha: f64) -> Self {
        Self { unitary, steps, alpha }
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    /// Number of split steps used.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.unitary.nrows()
    }
}

/// Batch of state vectors, `re[x][lane]` / `im[x][lane]`.
struct StateBatch {
    re: Vec<[f64; LANES]>,
    im: Vec<[f64; LANES]>,
}

impl StateBatch {
    fn basis(dim: usize, first: usize) -> Self {
        let mut re = vec![[0.0; LANES]; dim];
        let im = vec![[0.0; LANES]; dim];
        for lane in 0..LANES {
            if first + lane < dim {
                re[first + lane][lane] = 1.0;
            }
        }
        Self { re, im }
    }

    fn apply_phases(&mut self, phases: &[(f64, f64)]) {
        for ((re, im), &(c, s)) in self.re.iter_mut().zip(self.im.iter_mut()).zip(phases) {
            for l in 0..LANES {
                let (a, b) = (re[l], im[l]);
                re[l] = a * c - b * s;
                im[l] = a * s + b * c;
            }
        }
    }

    /// `exp(-i θ σ^x)` on every site.
    fn apply_field(&mut self, n: usize, theta: f64) {
        let (s, c) = theta.sin_cos();
        let dim = self.re.len();
        for b in 0..n {
            let bit = 1usize << b;
            for block in (0..dim).step_by(2 * bit) {
                for i in block..block + bit {
                    let j = i + bit;
                    let (ar, ai, br, bi) = (self.re[i], self.im[i], self.re[j], self.im[j]);
                    let (mut nar, mut nai, mut nbr, mut nbi) = ([0.0; LANES], [0.0; LANES], [0.0; LANES], [0.0; LANES]);
                    for l in 0..LANES {
                        nar[l] = c * ar[l] + s * bi[l];
                        nai[l] = c * ai[l] - s * br[l];
                        nbr[l] = c * br[l] + s * ai[l];
                        nbi[l] = c * bi[l] - s * ar[l];
                    }
                    self.re[i] = nar;
                    self.im[i] = nai;
                    self.re[j] = nbr;
                    self.im[j] = nbi;
                }
            }
        }
    }
}

/// A piecewise description of `γ` on consecutive steps.
pub(crate) struct StepPlan {
    pub dt: f64,
    pub gammas: Vec<f64>,
}

fn phases(energies: &[f64], tau: f64) -> Phases {
    energies
        .iter()
        .map(|e| {
            let (s, c) = (-e * tau).sin_cos();
            (c, s)
        })
        .collect()
}

/// Propagates every computational basis state through the step plan and
/// returns the resulting operator (column `y` is the image of `|y⟩`).
pub(crate) fn integrate(energies: &[f64], n: usize, field: f64, plans: &[StepPlan]) -> ComplexMatrix {
    let dim = energies.len();
    let mut out = ComplexMatrix::zeros(dim, dim);
    // (half-step, full-step) diagonal phase factors per plan
    let fused: Vec<(Phases, Phases)> =
        plans.iter().map(|p| (phases(energies, 0.5 * p.dt), phases(energies, p.dt))).collect();
    for first in (0..dim).step_by(LANES) {
        let mut batch = StateBatch::basis(dim, first);
        for (plan, (half, full)) in plans.iter().zip(&fused) {
            if plan.gammas.is_empty() {
                continue;
            }
            batch.apply_phases(half);
            let last = plan.gammas.len() - 1;
            for (m, g) in plan.gammas.iter().enumerate() {
                batch.apply_field(n, plan.dt * g * field);
                batch.apply_phases(if m == last { half } else { full });
            }
        }
        for lane in 0..LANES {
            let col = first + lane;
            if col >= dim {
                break;
            }
            for x in 0..dim {
                out.re[(x, col)] = batch.re[x][lane];
                out.im[(x, col)] = batch.im[x][lane];
            }
        }
    }
    out
}

fn step_count(duration: f64, steps_per_unit_time: usize) -> usize {
    ((duration * steps_per_unit_time as f64).ceil() as usize).max(1)
}

fn check_dense(hamiltonian: &ClassicalHamiltonian) -> Result<()> {
    let n = hamiltonian.n();
    if n > MAX_DENSE_SITES {
        return Err(Error::SizeCap { n, cap: MAX_DENSE_SITES, what: "dense operator" });
    }
    Ok(())
}

/// `U_1`: evolution over the ramp-up segment `[0, α]`.
pub fn ramp_propagator(
    hamiltonian: &ClassicalHamiltonian,
    field: f64,
    schedule: &RampSchedule,
    steps_per_unit_time: usize,
) -> Result<RampPropagator> {
    check_dense(hamiltonian)?;
    if steps_per_unit_time == 0 {
        return Err(invalid("steps per unit time must be >= 1"));
    }
    let alpha = schedule.alpha();
    let dim = dimension(hamiltonian.n());
    if alpha == 0.0 {
        return Ok(RampPropagator::identity(dim));
    }
    let energies = hamiltonian.energy_table()?;
    let steps = step_count(alpha, steps_per_unit_time);
    let dt = alpha / steps as f64;
    let gammas = (0..steps).map(|m| schedule.ramp_up((m as f64 + 0.5) * dt)).collect();
    let unitary = integrate(&energies, hamiltonian.n(), field, &[StepPlan { dt, gammas }]);
    Ok(RampPropagator { unitary, steps, alpha })
}

/// Explicit forward integration of the whole finite-plateau protocol
/// (ramp-up, plateau, ramp-down), each segment split-stepped on its own grid.
pub fn protocol_propagator(
    hamiltonian: &ClassicalHamiltonian,
    field: f64,
    schedule: &RampSchedule,
    steps_per_unit_time: usize,
) -> Result<ComplexMatrix> {
    check_dense(hamiltonian)?;
    let end = schedule.duration().ok_or_else(|| invalid("explicit protocol integration needs a finite plateau"))?;
    if steps_per_unit_time == 0 {
        return Err(invalid("steps per unit time must be >= 1"));
    }
    let alpha = schedule.alpha();
    let kappa = end - 2.0 * alpha;
    let mut plans = Vec::new();
    let mut t0 = 0.0;
    for length in [alpha, kappa, alpha] {
        if length > 0.0 {
            let steps = step_count(length, steps_per_unit_time);
            let dt = length / steps as f64;
            let gammas = (0..steps)
                .map(|m| schedule.value((t0 + (m as f64 + 0.5) * dt).min(end)))
                .collect::<Result<Vec<f64>>>()?;
            plans.push(StepPlan { dt, gammas });
        }
        t0 += length;
    }
    let energies = hamiltonian.energy_table()?;
    Ok(integrate(&energies, hamiltonian.n(), field, &plans))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::sample_sk;

    #[test]
    fn zero_ramp_is_identity() {
        let h = sample_sk(4, 1).unwrap();
        let u = ramp_propagator(&h, 1.5, &RampSchedule::quench(), 64).unwrap();
        assert_eq!(u.unitary(), &ComplexMatrix::identity(16));
        assert_eq!(u.steps(), 0);
    }

    #[test]
    fn unitary_to_rounding() {
        let h = ClassicalHamiltonian::ising_chain(6).unwrap();
        let s = RampSchedule::sin2(10.0).unwrap();
        let u = ramp_propagator(&h, 1.5, &s, 64).unwrap();
        assert_eq!(u.steps(), 640);
        assert!(u.unitary().unitarity_residual() < 1e-8);
    }

    #[test]
    fn small_dimensions_pad_lanes() {
        let h = ClassicalHamiltonian::sk(1, vec![], vec![0.3]).unwrap();
        let u = ramp_propagator(&h, 1.0, &RampSchedule::linear(1.0).unwrap(), 32).unwrap();
        assert_eq!(u.dim(), 2);
        assert!(u.unitary().unitarity_residual() < 1e-12);
    }

    #[test]
    fn split_step_is_complex_symmetric() {
        // every step is a symmetric matrix, and so the reversed product is the transpose
        let h = sample_sk(4, 3).unwrap();
        let s = RampSchedule::sin2(2.0).unwrap();
        let u = ramp_propagator(&h, 1.5, &s, 16).unwrap();
        let energies = h.energy_table().unwrap();
        let steps = u.steps();
        let dt = 2.0 / steps as f64;
        let gammas = (0..steps).rev().map(|m| s.ramp_up((m as f64 + 0.5) * dt)).collect();
        let down = integrate(&energies, 4, 1.5, &[StepPlan { dt, gammas }]);
        assert!(down.max_abs_diff(&u.unitary().transpose()) < 1e-12);
    }

    #[test]
    fn protocol_needs_finite_plateau() {
        let h = sample_sk(3, 3).unwrap();
        assert!(protocol_propagator(&h, 1.0, &RampSchedule::sin2(1.0).unwrap(), 16).is_err());
    }
}
