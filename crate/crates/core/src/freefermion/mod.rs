//! Free-fermion evaluation of the bottleneck bound for the periodic Ising
//! chain.
//!
//! After a Jordan-Wigner transformation the ramped chain decouples into
//! independent two-level momentum modes. Each mode `k` sees
//! `H_k(t) = 2[(γ(t) h - cos k) σ^z + sin k σ^y]` and starts in the classical
//! vacuum `(cos(k/2), -i sin(k/2))`; `η_k` is its probability of ending the
//! ramp in the excited plateau eigenstate. The bound on the gap follows from
//! `f_k = 2η_k² - 2η_k + 1` summed over the two parity sectors.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::problems::{Kappa, RampSchedule};

/// Smallest number of integration steps used for a nonzero ramp.
pub const MIN_MODE_STEPS: usize = 100;

/// Default integration resolution for the mode equations.
pub const DEFAULT_MODE_STEPS_PER_UNIT_TIME: usize = 200;

/// Default number of Simpson intervals on `[0, π]`.
pub const DEFAULT_QUADRATURE_INTERVALS: usize = 512;

/// Largest chain handled by the momentum-sector sums. The large-`N`
/// quadrature has no cap.
pub const MAX_CHAIN_SITES: usize = 64;

/// Largest norm drift tolerated in a mode integration.
pub const NORM_TOLERANCE: f64 = 1e-8;

/// One fermion-parity sector of an `N`-site chain with its positive momenta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumSector {
    pub parity: u8,
    pub n: usize,
    pub momenta: Vec<f64>,
}

impl MomentumSector {
    /// Even parity: `k = (2π/N)(l - 1/2)`, `l = 1..=N/2`. Odd parity:
    /// `k = (2π/N) l`, `l = 1..N/2`; the `k = 0, π` modes of the odd sector
    /// never make a transition and are left out.
    pub fn new(n: usize, parity: u8) -> Result<Self> {
        check_even(n)?;
        let step = 2.0 * PI / n as f64;
        let momenta = match parity {
            0 => (1..=n / 2).map(|l| step * (l as f64 - 0.5)).collect(),
            1 => (1..n / 2).map(|l| step * l as f64).collect(),
            p => return Err(invalid(format!("parity must be 0 or 1, got {p}"))),
        };
        Ok(Self { parity, n, momenta })
    }

    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }
}

fn check_even(n: usize) -> Result<()> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(invalid(format!("the momentum-sector construction needs even N >= 4, got {n}")));
    }
    if n > MAX_CHAIN_SITES {
        return Err(Error::SizeCap { n, cap: MAX_CHAIN_SITES, what: "momentum-sector" });
    }
    Ok(())
}

/// Outcome of one mode integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeResult {
    pub k: f64,
    pub eta: f64,
    pub f: f64,
    pub steps: usize,
    pub norm_residual: f64,
}

/// `f = 2η² - 2η + 1`.
#[inline]
pub fn f_from_eta(eta: f64) -> f64 {
    2.0 * eta * eta - 2.0 * eta + 1.0
}

/// Plateau mode energy `ε_k = sqrt((h - cos k)² + sin² k)`.
pub fn mode_energy(k: f64, h: f64) -> f64 {
    (h - k.cos()).hypot(k.sin())
}

/// Mixing angle of the plateau mode, `θ_k = acos((h - cos k)/ε_k)`.
pub fn plateau_angle(k: f64, h: f64) -> f64 {
    ((h - k.cos()) / mode_energy(k, h)).clamp(-1.0, 1.0).acos()
}

/// Quench transition probability `cos²((θ_k + k)/2)`.
pub fn quench_eta(k: f64, h: f64) -> f64 {
    ((plateau_angle(k, h) + k) / 2.0).cos().powi(2)
}

/// Quench value `f_k⁰ = 1 - h² sin² k / (2 ε_k²)`.
pub fn quench_f(k: f64, h: f64) -> f64 {
    let e = mode_energy(k, h);
    1.0 - h * h * k.sin().powi(2) / (2.0 * e * e)
}

/// Field vector `(x, y, z)` of the mode Hamiltonian `p · σ` at ramp value `γ`.
#[inline]
fn field_vector(k: f64, h: f64, gamma: f64) -> [f64; 3] {
    [0.0, 2.0 * k.sin(), 2.0 * (gamma * h - k.cos())]
}

#[inline]
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Applies `exp(-i a · σ)` to `ψ`.
#[inline]
fn rotate(a: [f64; 3], psi: [Complex64; 2]) -> [Complex64; 2] {
    let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    if norm == 0.0 {
        return psi;
    }
    let (s, c) = norm.sin_cos();
    let (x, y, z) = (a[0] / norm, a[1] / norm, a[2] / norm);
    let i = Complex64::i();
    // a·σ = [[z, x - i y], [x + i y, -z]]
    let m00 = Complex64::new(c, 0.0) - i * s * z;
    let m11 = Complex64::new(c, 0.0) + i * s * z;
    let m01 = -i * s * Complex64::new(x, -y);
    let m10 = -i * s * Complex64::new(x, y);
    [m00 * psi[0] + m01 * psi[1], m10 * psi[0] + m11 * psi[1]]
}

fn check_mode_args(k: f64, h: f64) -> Result<()> {
    if !(k > 0.0 && k < PI) {
        return Err(invalid(format!("mode momentum must lie in (0, π), got {k}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(format!("transverse field must be positive, got {h}")));
    }
    Ok(())
}

/// Transition probability of mode `k` over the ramp-up segment, integrated
/// with the fourth-order two-point Gauss-Legendre Magnus scheme (exactly
/// unitary per step). The step count is `steps_per_unit_time · α`, at least
/// [`MIN_MODE_STEPS`].
pub fn mode_eta(k: f64, h: f64, schedule: &RampSchedule, steps_per_unit_time: usize) -> Result<ModeResult> {
    check_mode_args(k, h)?;
    let alpha = schedule.alpha();
    if alpha == 0.0 {
        let eta = quench_eta(k, h);
        return Ok(ModeResult { k, eta, f: f_from_eta(eta), steps: 0, norm_residual: 0.0 });
    }
    let steps = ((alpha * steps_per_unit_time as f64).ceil() as usize).max(MIN_MODE_STEPS);
    let dt = alpha / steps as f64;
    let offset = 3f64.sqrt() / 6.0;
    let commutator_weight = 3f64.sqrt() / 6.0 * dt * dt;
    let (half_s, half_c) = (0.5 * k).sin_cos();
    let mut psi = [Complex64::new(half_c, 0.0), Complex64::new(0.0, -half_s)];
    for m in 0..steps {
        let t0 = m as f64 * dt;
        let p = field_vector(k, h, schedule.ramp_up(t0 + (0.5 - offset) * dt));
        let q = field_vector(k, h, schedule.ramp_up(t0 + (0.5 + offset) * dt));
        let qp = cross(q, p);
        let a = [
            0.5 * dt * (p[0] + q[0]) + commutator_weight * qp[0],
            0.5 * dt * (p[1] + q[1]) + commutator_weight * qp[1],
            0.5 * dt * (p[2] + q[2]) + commutator_weight * qp[2],
        ];
        psi = rotate(a, psi);
    }
    let norm_residual = (psi[0].norm_sqr() + psi[1].norm_sqr() - 1.0).abs();
    if norm_residual > NORM_TOLERANCE {
        return Err(Error::Numerical(format!(
            "mode k={k} lost norm by {norm_residual:e}; increase the steps per unit time"
        )));
    }
    let (ts, tc) = (0.5 * plateau_angle(k, h)).sin_cos();
    // ⟨1_k| with |1_k⟩ = (cos(θ/2), i sin(θ/2))
    let amp = tc * psi[0] - Complex64::i() * ts * psi[1];
    let eta = amp.norm_sqr().clamp(0.0, 1.0);
    Ok(ModeResult { k, eta, f: f_from_eta(eta), steps, norm_residual })
}

/// Landau-Zener estimate of `η_k` for a ramp of length `α`.
///
/// For `h >= 1` the ramp crosses the critical point and the minimal mode gap
/// is taken as `k` (valid for small `k`); for `h < 1` the minimal gap
/// `min_γ sqrt((γh - cos k)² + sin² k)` is located on a `10⁻³` grid in `γ`.
pub fn lz_eta_approx(k: f64, h: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        return 1.0;
    }
    let gap = if h >= 1.0 {
        k
    } else {
        (0..=1000)
            .map(|i| {
                let g = i as f64 * 1e-3;
                (g * h - k.cos()).hypot(k.sin())
            })
            .fold(f64::INFINITY, f64::min)
    };
    (-(2.0 * PI / h) * alpha * gap * gap).exp()
}

/// Terms of the Ising bound; `bound = sector0 + sector1 + tail`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsingBound {
    pub n: usize,
    pub beta: f64,
    pub h: f64,
    pub alpha: f64,
    pub bound: f64,
    pub tail: f64,
    /// Even-sector contribution, including the `1/(N(N-1))` prefactor.
    pub sector0: f64,
    /// Odd-sector contribution, including the `1/(N(N-1))` prefactor.
    pub sector1: f64,
}

/// `e^{-4β} / (2 - N(N-1) e^{-4β})`, the contribution of higher excitations.
pub fn tail_term(n: usize, beta: f64) -> Result<f64> {
    let w = (-4.0 * beta).exp();
    let denom = 2.0 - (n * (n - 1)) as f64 * w;
    if denom.is_nan() || denom <= 0.0 {
        return Err(invalid(format!("beta={beta} is too small for the tail term at N={n} (denominator {denom})")));
    }
    Ok(w / denom)
}

fn check_large_kappa(schedule: &RampSchedule) -> Result<()> {
    if schedule.kappa() != Kappa::LargeKappaLimit {
        return Err(invalid("the free-fermion bound is defined in the large-plateau limit only"));
    }
    Ok(())
}

/// `(Π f_k) Σ (1/f_k - 1)` over one sector.
fn sector_sum(fs: &[f64]) -> f64 {
    let product: f64 = fs.iter().product();
    product * fs.iter().map(|f| 1.0 / f - 1.0).sum::<f64>()
}

/// Bottleneck upper bound on the spectral gap of the ramped Ising chain.
pub fn ising_bound(
    n: usize,
    beta: f64,
    h: f64,
    schedule: &RampSchedule,
    steps_per_unit_time: usize,
) -> Result<IsingBound> {
    check_even(n)?;
    check_large_kappa(schedule)?;
    let tail = tail_term(n, beta)?;
    let prefactor = 1.0 / (n * (n - 1)) as f64;
    let mut terms = [0.0; 2];
    for (parity, term) in terms.iter_mut().enumerate() {
        let sector = MomentumSector::new(n, parity as u8)?;
        let fs = sector
            .momenta
            .iter()
            .map(|&k| mode_eta(k, h, schedule, steps_per_unit_time).map(|r| r.f))
            .collect::<Result<Vec<f64>>>()?;
        *term = prefactor * sector_sum(&fs);
    }
    Ok(IsingBound {
        n,
        beta,
        h,
        alpha: schedule.alpha(),
        bound: terms[0] + terms[1] + tail,
        tail,
        sector0: terms[0],
        sector1: terms[1],
    })
}

/// Composite Simpson rule for samples on a uniform grid (even interval count).
pub fn simpson(samples: &[f64], width: f64) -> Result<f64> {
    let intervals = samples.len().saturating_sub(1);
    if intervals < 2 || !intervals.is_multiple_of(2) {
        return Err(invalid(format!("Simpson's rule needs an even number of intervals, got {intervals}")));
    }
    let h = width / intervals as f64;
    let inner: f64 =
        samples[1..intervals].iter().enumerate().map(|(i, v)| if i % 2 == 0 { 4.0 * v } else { 2.0 * v }).sum();
    Ok(h / 3.0 * (samples[0] + inner + samples[intervals]))
}

/// Large-`N` form of the bound with the momentum sums replaced by integrals
/// over `(0, π)`, evaluated with composite Simpson quadrature.
pub fn ising_bound_large_n(
    n: usize,
    beta: f64,
    h: f64,
    schedule: &RampSchedule,
    steps_per_unit_time: usize,
    intervals: usize,
) -> Result<f64> {
    check_large_kappa(schedule)?;
    let f_of = |k: f64| mode_eta(k, h, schedule, steps_per_unit_time).map(|r| r.f);
    large_n_from_f(n, beta, f_of, intervals)
}

/// Large-`N` bound for an arbitrary mode function `f(k)` (`f = 1` is used at
/// the endpoints `k = 0, π`, where no transition is possible).
pub fn large_n_from_f(n: usize, beta: f64, f_of: impl Fn(f64) -> Result<f64>, intervals: usize) -> Result<f64> {
    if n < 2 {
        return Err(invalid(format!("N must be >= 2, got {n}")));
    }
    let tail = tail_term(n, beta)?;
    let fs = (0..=intervals)
        .map(|i| if i == 0 || i == intervals { Ok(1.0) } else { f_of(PI * i as f64 / intervals as f64) })
        .collect::<Result<Vec<f64>>>()?;
    let log_inv: Vec<f64> = fs.iter().map(|f| -f.ln()).collect();
    let excess: Vec<f64> = fs.iter().map(|f| 1.0 / f - 1.0).collect();
    let i_log = simpson(&log_inv, PI)?;
    let i_excess = simpson(&excess, PI)?;
    let nf = n as f64;
    Ok((-(nf / (2.0 * PI)) * i_log).exp() * i_excess / (PI * (nf - 1.0)) + tail)
}
