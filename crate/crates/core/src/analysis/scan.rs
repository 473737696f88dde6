use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_scaling, FitKind, ScalingFit};
use crate::chain::{metropolis_transition, spectral_gap};
use crate::error::{invalid, Error, Result};
use crate::problems::{
    boltzmann, ClassicalHamiltonian, DisorderModel, DisorderSpec, Kappa, RampKind, RampSchedule, MAX_DENSE_SITES,
};
use crate::quantum::{plateau_spectrum, ramp_propagator, RampOverlaps};

/// Ramp times scanned when none are given.
pub const DEFAULT_ALPHA_GRID: [f64; 10] = [0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0];

/// Disorder instances drawn when no count is given.
pub const DEFAULT_INSTANCES: usize = 50;

/// Physical and numerical settings shared by every point of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub beta: f64,
    pub h: f64,
    pub kind: RampKind,
    pub alphas: Vec<f64>,
    pub kappa: Kappa,
    pub steps_per_unit_time: usize,
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(invalid("the ramp-time grid is empty"));
        }
        if self.alphas.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(invalid("ramp times must be finite and >= 0"));
        }
        if self.alphas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("ramp times must be strictly increasing"));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) || !self.h.is_finite() {
            return Err(invalid("beta must be finite and >= 0 and h finite"));
        }
        Ok(())
    }

    fn schedule(&self, alpha: f64) -> Result<RampSchedule> {
        let kind = if alpha == 0.0 { RampKind::Quench } else { self.kind };
        RampSchedule::new(kind, alpha, self.kappa)
    }
}

/// Gap of one instance at one ramp time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceGap {
    pub instance: usize,
    pub seed: u64,
    pub alpha: f64,
    /// `None` in the large-plateau limit.
    pub kappa: Option<f64>,
    pub delta: f64,
    pub lambda2: f64,
    pub db_residual: f64,
    pub stationarity_residual: f64,
}

/// An instance excluded from an average, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFailure {
    pub instance: usize,
    pub seed: u64,
    pub message: String,
}

/// Mean gap at one ramp time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub alpha: f64,
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

/// Disorder-averaged gap as a function of the ramp time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCurve {
    pub model: String,
    pub n: usize,
    pub beta: f64,
    pub h: f64,
    pub kind: RampKind,
    pub kappa: Kappa,
    pub points: Vec<GapPoint>,
}

/// Result of [`disorder_scan`]: the averaged curve plus the per-instance data
/// it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderScan {
    pub curve: GapCurve,
    pub records: Vec<InstanceGap>,
    pub failures: Vec<InstanceFailure>,
}

/// Sample mean and standard error of the mean (zero for a single value).
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let m = values.len();
    if m == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    if m == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
    (mean, (var / m as f64).sqrt())
}

/// Gaps of one Hamiltonian over the ramp-time grid. The plateau spectrum and
/// target are computed once and shared by every ramp time.
pub fn instance_gaps(
    hamiltonian: &ClassicalHamiltonian,
    instance: usize,
    seed: u64,
    config: &ScanConfig,
) -> Result<Vec<InstanceGap>> {
    config.validate()?;
    let spectrum = plateau_spectrum(hamiltonian, config.h)?;
    let target = boltzmann(hamiltonian, config.beta)?;
    config
        .alphas
        .iter()
        .map(|&alpha| {
            let schedule = config.schedule(alpha)?;
            let u = ramp_propagator(hamiltonian, config.h, &schedule, config.steps_per_unit_time)?;
            let overlaps = RampOverlaps::new(&u, &spectrum)?;
            let proposal = match config.kappa {
                Kappa::LargeKappaLimit => overlaps.time_averaged(),
                Kappa::Finite(k) => overlaps.finite_kappa(k)?,
            };
            let gap = spectral_gap(&metropolis_transition(&proposal, &target)?)?;
            Ok(InstanceGap {
                instance,
                seed,
                alpha,
                kappa: match config.kappa {
                    Kappa::Finite(k) => Some(k),
                    Kappa::LargeKappaLimit => None,
                },
                delta: gap.delta,
                lambda2: gap.lambda2,
                db_residual: gap.detailed_balance_residual,
                stationarity_residual: gap.stationarity_residual,
            })
        })
        .collect()
}

/// Averages per-instance records onto the configured ramp-time grid.
pub fn aggregate(model: &str, n: usize, config: &ScanConfig, records: &[InstanceGap]) -> GapCurve {
    let points = config
        .alphas
        .iter()
        .map(|&alpha| {
            let values: Vec<f64> = records.iter().filter(|r| r.alpha == alpha).map(|r| r.delta).collect();
            let (mean, stderr) = mean_and_stderr(&values);
            GapPoint { alpha, mean, stderr, count: values.len() }
        })
        .collect();
    GapCurve {
        model: model.to_string(),
        n,
        beta: config.beta,
        h: config.h,
        kind: config.kind,
        kappa: config.kappa,
        points,
    }
}

/// Disorder-averaged gap curve. Instances run in parallel; the merge is in
/// instance order, so results do not depend on scheduling. An instance that
/// fails numerically is logged and left out of the averages.
pub fn disorder_scan(spec: &DisorderSpec, config: &ScanConfig) -> Result<DisorderScan> {
    config.validate()?;
    if spec.instances < 2 {
        return Err(invalid(format!("a disorder average needs at least 2 instances, got {}", spec.instances)));
    }
    // surface size-cap and model errors before spending any time
    spec.sample(spec.instance_seed(0))?;
    if spec.n > MAX_DENSE_SITES {
        return Err(Error::SizeCap { n: spec.n, cap: MAX_DENSE_SITES, what: "dense operator" });
    }
    let outcomes: Vec<(usize, u64, Result<Vec<InstanceGap>>)> = (0..spec.instances)
        .into_par_iter()
        .map(|i| {
            let seed = spec.instance_seed(i);
            let out = spec.sample(seed).and_then(|h| instance_gaps(&h, i, seed, config));
            (i, seed, out)
        })
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (instance, seed, out) in outcomes {
        match out {
            Ok(r) => records.extend(r),
            Err(e) => {
                log::warn!("instance {instance} (seed {seed}) of {} N={} excluded: {e}", spec.model.name(), spec.n);
                failures.push(InstanceFailure { instance, seed, message: e.to_string() });
            }
        }
    }
    let curve = aggregate(spec.model.name(), spec.n, config, &records);
    Ok(DisorderScan { curve, records, failures })
}

/// Log-uniform grid of `points` plateau lengths on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
}

/// The 64 log-uniform plateau lengths on `[10², 10⁵]` used for κ averages.
pub fn default_kappa_grid() -> Vec<f64> {
    log_grid(1e2, 1e5, 64)
}

/// Gap against plateau length for one instance and ramp time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaScan {
    pub alpha: f64,
    /// `(κ, δ)` pairs.
    pub points: Vec<(f64, f64)>,
    pub mean: f64,
    /// Standard error of the grid mean.
    pub stderr: f64,
    /// Gap of the time-averaged (large-plateau) proposal.
    pub large_kappa_gap: f64,
}

pub fn kappa_scan(
    hamiltonian: &ClassicalHamiltonian,
    beta: f64,
    h: f64,
    kind: RampKind,
    alpha: f64,
    kappas: &[f64],
    steps_per_unit_time: usize,
) -> Result<KappaScan> {
    if kappas.is_empty() || kappas.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
        return Err(invalid("plateau lengths must be positive and finite"));
    }
    let kind = if alpha == 0.0 { RampKind::Quench } else { kind };
    let schedule = RampSchedule::new(kind, alpha, Kappa::LargeKappaLimit)?;
    let spectrum = plateau_spectrum(hamiltonian, h)?;
    let target = boltzmann(hamiltonian, beta)?;
    let overlaps = RampOverlaps::new(&ramp_propagator(hamiltonian, h, &schedule, steps_per_unit_time)?, &spectrum)?;
    let points = kappas
        .iter()
        .map(|&k| Ok((k, spectral_gap(&metropolis_transition(&overlaps.finite_kappa(k)?, &target)?)?.delta)))
        .collect::<Result<Vec<_>>>()?;
    let deltas: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (mean, stderr) = mean_and_stderr(&deltas);
    let large_kappa_gap = spectral_gap(&metropolis_transition(&overlaps.time_averaged(), &target)?)?.delta;
    Ok(KappaScan { alpha, points, mean, stderr, large_kappa_gap })
}

/// Gap at `α = N` for each size, and the exponential fit through the
/// disorder means.
pub fn alpha_equals_n_scan(
    model: DisorderModel,
    sizes: &[usize],
    seed: u64,
    instances: usize,
    base: &ScanConfig,
) -> Result<(ScalingFit, Vec<GapCurve>)> {
    let mut curves = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let config = ScanConfig { alphas: vec![n as f64], ..base.clone() };
        curves.push(disorder_scan(&DisorderSpec::new(model, n, seed, instances), &config)?.curve);
    }
    let points: Vec<(f64, f64, f64)> =
        curves.iter().map(|c| (c.n as f64, c.points[0].mean, c.points[0].stderr)).collect();
    Ok((fit_scaling(&points, FitKind::Exponential)?, curves))
}
