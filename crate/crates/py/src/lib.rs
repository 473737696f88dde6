//! Python bindings: classical Hamiltonians, exact spectral gaps of the
//! quantum-proposal chain, the free-fermion Ising bound, disorder averages,
//! plateau-length scans and scaling fits.

// The Python functions mirror keyword-argument signatures.
#![allow(clippy::too_many_arguments)]

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use qmcmc_core::analysis::{self, FitKind, InstanceGap, ScanConfig};
use qmcmc_core::freefermion;
use qmcmc_core::problems::{
    self, ClassicalHamiltonian, DisorderModel, DisorderSpec, InstanceRecord, Kappa, RampKind, RampSchedule,
};
use qmcmc_core::Error;

/// Numerical failures surface as `ArithmeticError`, everything else as
/// `ValueError`.
fn to_py(e: Error) -> PyErr {
    match e {
        Error::Numerical(_)
        | Error::NotHermitian { .. }
        | Error::AsymmetricProposal { .. }
        | Error::NotReversible { .. } => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn ramp_kind(name: &str) -> PyResult<RampKind> {
    name.parse().map_err(to_py)
}

fn kappa_of(kappa: Option<f64>) -> Kappa {
    kappa.map_or(Kappa::LargeKappaLimit, Kappa::Finite)
}

/// A classical spin Hamiltonian on `n` sites.
#[pyclass(name = "Hamiltonian", module = "qmcmc_py", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyHamiltonian {
    inner: ClassicalHamiltonian,
    seed: Option<u64>,
}

#[pymethods]
impl PyHamiltonian {
    /// Ferromagnetic periodic Ising chain.
    #[staticmethod]
    fn ising_chain(n: usize) -> PyResult<Self> {
        Ok(Self { inner: ClassicalHamiltonian::ising_chain(n).map_err(to_py)?, seed: None })
    }

    /// Sherrington-Kirkpatrick instance drawn from `seed`.
    #[staticmethod]
    fn sk(n: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: problems::sample_sk(n, seed).map_err(to_py)?, seed: Some(seed) })
    }

    /// Three-spin-glass instance drawn from `seed`.
    #[staticmethod]
    fn three_spin(n: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: problems::sample_3spin(n, seed).map_err(to_py)?, seed: Some(seed) })
    }

    /// Parses an instance record (the JSON written by `to_json`).
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let record: InstanceRecord =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("invalid instance record: {e}")))?;
        Ok(Self { inner: record.to_hamiltonian().map_err(to_py)?, seed: record.seed })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&InstanceRecord::from_hamiltonian(&self.inner, self.seed))
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn model(&self) -> &'static str {
        self.inner.model_name()
    }

    #[getter]
    fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Energies of all `2^n` configurations; bit `b` set means spin `b` down.
    fn energies(&self) -> PyResult<Vec<f64>> {
        self.inner.energy_table().map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Hamiltonian(model={:?}, n={}, seed={:?})", self.inner.model_name(), self.inner.n(), self.seed)
    }
}

/// Spectral gap of one chain.
#[pyclass(name = "Gap", module = "qmcmc_py", frozen, skip_from_py_object, get_all)]
#[derive(Clone)]
pub struct PyGap {
    alpha: f64,
    /// `None` in the large-plateau limit.
    kappa: Option<f64>,
    delta: f64,
    lambda2: f64,
    detailed_balance_residual: f64,
    stationarity_residual: f64,
}

impl From<&InstanceGap> for PyGap {
    fn from(g: &InstanceGap) -> Self {
        Self {
            alpha: g.alpha,
            kappa: g.kappa,
            delta: g.delta,
            lambda2: g.lambda2,
            detailed_balance_residual: g.db_residual,
            stationarity_residual: g.stationarity_residual,
        }
    }
}

#[pymethods]
impl PyGap {
    fn __repr__(&self) -> String {
        format!("Gap(alpha={}, kappa={:?}, delta={:e})", self.alpha, self.kappa, self.delta)
    }
}

fn scan_config(
    beta: f64,
    h: f64,
    alphas: Vec<f64>,
    ramp: &str,
    kappa: Option<f64>,
    steps: usize,
) -> PyResult<ScanConfig> {
    Ok(ScanConfig { beta, h, kind: ramp_kind(ramp)?, alphas, kappa: kappa_of(kappa), steps_per_unit_time: steps })
}

/// Gaps of the Metropolis chain with ramped quantum proposals, one per ramp
/// time. `kappa=None` uses the large-plateau (time-averaged) proposal.
#[pyfunction]
#[pyo3(signature = (hamiltonian, beta, h, alphas, ramp = "sin2", kappa = None, steps_per_unit_time = 64))]
fn gap_scan(
    py: Python<'_>,
    hamiltonian: &PyHamiltonian,
    beta: f64,
    h: f64,
    alphas: Vec<f64>,
    ramp: &str,
    kappa: Option<f64>,
    steps_per_unit_time: usize,
) -> PyResult<Vec<PyGap>> {
    let config = scan_config(beta, h, alphas, ramp, kappa, steps_per_unit_time)?;
    let ham = hamiltonian.inner.clone();
    let seed = hamiltonian.seed.unwrap_or(0);
    let gaps = py.detach(move || analysis::instance_gaps(&ham, 0, seed, &config)).map_err(to_py)?;
    Ok(gaps.iter().map(PyGap::from).collect())
}

/// Gap at a single ramp time.
#[pyfunction]
#[pyo3(signature = (hamiltonian, beta, h, alpha, ramp = "sin2", kappa = None, steps_per_unit_time = 64))]
fn spectral_gap(
    py: Python<'_>,
    hamiltonian: &PyHamiltonian,
    beta: f64,
    h: f64,
    alpha: f64,
    ramp: &str,
    kappa: Option<f64>,
    steps_per_unit_time: usize,
) -> PyResult<PyGap> {
    let mut gaps = gap_scan(py, hamiltonian, beta, h, vec![alpha], ramp, kappa, steps_per_unit_time)?;
    Ok(gaps.remove(0))
}

/// Free-fermion lower-level bound on the gap of the periodic Ising chain.
#[pyclass(name = "IsingBound", module = "qmcmc_py", frozen, skip_from_py_object, get_all)]
#[derive(Clone)]
pub struct PyIsingBound {
    n: usize,
    beta: f64,
    h: f64,
    alpha: f64,
    bound: f64,
    tail: f64,
    sector0: f64,
    sector1: f64,
}

#[pymethods]
impl PyIsingBound {
    fn __repr__(&self) -> String {
        format!("IsingBound(n={}, alpha={}, bound={:e})", self.n, self.alpha, self.bound)
    }
}

#[pyfunction]
#[pyo3(signature = (n, beta, h, alpha, ramp = "sin2", mode_steps = 200))]
fn ising_bound(
    py: Python<'_>,
    n: usize,
    beta: f64,
    h: f64,
    alpha: f64,
    ramp: &str,
    mode_steps: usize,
) -> PyResult<PyIsingBound> {
    let schedule = RampSchedule::new(ramp_kind(ramp)?, alpha, Kappa::LargeKappaLimit).map_err(to_py)?;
    let b = py.detach(|| freefermion::ising_bound(n, beta, h, &schedule, mode_steps)).map_err(to_py)?;
    Ok(PyIsingBound {
        n: b.n,
        beta: b.beta,
        h: b.h,
        alpha: b.alpha,
        bound: b.bound,
        tail: b.tail,
        sector0: b.sector0,
        sector1: b.sector1,
    })
}

/// Ramp time maximizing the Ising bound, as `(alpha, bound)`.
#[pyfunction]
#[pyo3(signature = (n, beta, h, ramp = "sin2", mode_steps = 200, rel_tol = 1e-3))]
fn ising_bound_peak(
    py: Python<'_>,
    n: usize,
    beta: f64,
    h: f64,
    ramp: &str,
    mode_steps: usize,
    rel_tol: f64,
) -> PyResult<(f64, f64)> {
    let kind = ramp_kind(ramp)?;
    let p = py.detach(|| analysis::ising_bound_peak(n, beta, h, kind, mode_steps, rel_tol)).map_err(to_py)?;
    Ok((p.alpha, p.bound))
}

/// Disorder-averaged gap curve.
#[pyclass(name = "GapCurve", module = "qmcmc_py", frozen, skip_from_py_object, get_all)]
#[derive(Clone)]
pub struct PyGapCurve {
    model: String,
    n: usize,
    alphas: Vec<f64>,
    means: Vec<f64>,
    stderrs: Vec<f64>,
    counts: Vec<usize>,
    /// `(seed, message)` of excluded instances.
    failures: Vec<(u64, String)>,
}

#[pymethods]
impl PyGapCurve {
    /// Grid argmax as `(alpha, mean, stderr, at_boundary)`.
    fn peak(&self) -> PyResult<(f64, f64, f64, bool)> {
        let best = (0..self.means.len())
            .reduce(|b, i| if self.means[i] > self.means[b] { i } else { b })
            .ok_or_else(|| PyValueError::new_err("empty curve"))?;
        Ok((self.alphas[best], self.means[best], self.stderrs[best], best == 0 || best + 1 == self.means.len()))
    }

    fn __repr__(&self) -> String {
        format!("GapCurve(model={:?}, n={}, points={})", self.model, self.n, self.alphas.len())
    }
}

/// Mean gap over `instances` disorder draws derived from `seed`.
#[pyfunction]
#[pyo3(signature = (model, n, seed, instances, beta, h, alphas, ramp = "sin2", kappa = None, steps_per_unit_time = 64))]
fn disorder_scan(
    py: Python<'_>,
    model: &str,
    n: usize,
    seed: u64,
    instances: usize,
    beta: f64,
    h: f64,
    alphas: Vec<f64>,
    ramp: &str,
    kappa: Option<f64>,
    steps_per_unit_time: usize,
) -> PyResult<PyGapCurve> {
    let model: DisorderModel = model.parse().map_err(to_py)?;
    let config = scan_config(beta, h, alphas, ramp, kappa, steps_per_unit_time)?;
    let spec = DisorderSpec::new(model, n, seed, instances);
    let scan = py.detach(|| analysis::disorder_scan(&spec, &config)).map_err(to_py)?;
    let p = &scan.curve.points;
    Ok(PyGapCurve {
        model: scan.curve.model.clone(),
        n,
        alphas: p.iter().map(|x| x.alpha).collect(),
        means: p.iter().map(|x| x.mean).collect(),
        stderrs: p.iter().map(|x| x.stderr).collect(),
        counts: p.iter().map(|x| x.count).collect(),
        failures: scan.failures.iter().map(|f| (f.seed, f.message.clone())).collect(),
    })
}

/// `(points, mean, stderr, large_kappa_gap)` of a plateau-length scan.
type KappaScanTuple = (Vec<(f64, f64)>, f64, f64, f64);

/// Gap against plateau length: returns `(points, mean, stderr, large_kappa_gap)`
/// with `points` a list of `(kappa, delta)`.
#[pyfunction]
#[pyo3(signature = (hamiltonian, beta, h, alpha, kappas, ramp = "sin2", steps_per_unit_time = 64))]
fn kappa_scan(
    py: Python<'_>,
    hamiltonian: &PyHamiltonian,
    beta: f64,
    h: f64,
    alpha: f64,
    kappas: Vec<f64>,
    ramp: &str,
    steps_per_unit_time: usize,
) -> PyResult<KappaScanTuple> {
    let kind = ramp_kind(ramp)?;
    let ham = &hamiltonian.inner;
    let s =
        py.detach(|| analysis::kappa_scan(ham, beta, h, kind, alpha, &kappas, steps_per_unit_time)).map_err(to_py)?;
    Ok((s.points, s.mean, s.stderr, s.large_kappa_gap))
}

/// Logarithmically spaced plateau lengths.
#[pyfunction]
fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    analysis::log_grid(lo, hi, points)
}

/// Weighted fit of gap against size.
#[pyclass(name = "ScalingFit", module = "qmcmc_py", frozen, skip_from_py_object, get_all)]
#[derive(Clone)]
pub struct PyScalingFit {
    kind: String,
    /// Decay exponent: `δ ∝ 2^{-exponent·N}` or `δ ∝ N^{-exponent}`.
    exponent: f64,
    err: f64,
    intercept: f64,
    chi2_nu: f64,
    points_used: usize,
}

#[pymethods]
impl PyScalingFit {
    fn __repr__(&self) -> String {
        format!("ScalingFit(kind={:?}, exponent={:.4}±{:.4})", self.kind, self.exponent, self.err)
    }
}

/// Fits `(N, δ, σ)` points; `errors=None` weights every point equally.
#[pyfunction]
#[pyo3(signature = (sizes, gaps, errors = None, kind = "exponential"))]
fn fit_scaling(sizes: Vec<f64>, gaps: Vec<f64>, errors: Option<Vec<f64>>, kind: &str) -> PyResult<PyScalingFit> {
    if sizes.len() != gaps.len() || errors.as_ref().is_some_and(|e| e.len() != gaps.len()) {
        return Err(PyValueError::new_err("sizes, gaps and errors must have equal lengths"));
    }
    let fit_kind: FitKind = kind.parse().map_err(to_py)?;
    // unit weight in log space: σ_δ = δ
    let points: Vec<(f64, f64, f64)> = match errors {
        Some(e) => sizes.iter().zip(&gaps).zip(&e).map(|((&n, &d), &s)| (n, d, s)).collect(),
        None => sizes.iter().zip(&gaps).map(|(&n, &d)| (n, d, d)).collect(),
    };
    let f = analysis::fit_scaling(&points, fit_kind).map_err(to_py)?;
    Ok(PyScalingFit {
        kind: kind.to_ascii_lowercase(),
        exponent: f.exponent,
        err: f.err,
        intercept: f.intercept,
        chi2_nu: f.chi2_nu,
        points_used: f.points_used,
    })
}

#[pymodule]
fn qmcmc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHamiltonian>()?;
    m.add_class::<PyGap>()?;
    m.add_class::<PyIsingBound>()?;
    m.add_class::<PyGapCurve>()?;
    m.add_class::<PyScalingFit>()?;
    m.add_function(wrap_pyfunction!(gap_scan, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_gap, m)?)?;
    m.add_function(wrap_pyfunction!(ising_bound, m)?)?;
    m.add_function(wrap_pyfunction!(ising_bound_peak, m)?)?;
    m.add_function(wrap_pyfunction!(disorder_scan, m)?)?;
    m.add_function(wrap_pyfunction!(kappa_scan, m)?)?;
    m.add_function(wrap_pyfunction!(log_grid, m)?)?;
    m.add_function(wrap_pyfunction!(fit_scaling, m)?)?;
    m.add("MAX_DENSE_SITES", problems::MAX_DENSE_SITES)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_python_exception_types() {
        Python::attach(|py| {
            assert!(to_py(Error::Numerical("x".into())).is_instance_of::<PyArithmeticError>(py));
            assert!(to_py(Error::SizeCap { n: 20, cap: 14, what: "dense operator" }).is_instance_of::<PyValueError>(py));
        });
    }

    #[test]
    fn module_exposes_types_and_functions() {
        Python::attach(|py| {
            let m = PyModule::new(py, "qmcmc_py").unwrap();
            qmcmc_py(&m).unwrap();
            for name in ["Hamiltonian", "gap_scan", "ising_bound", "fit_scaling", "disorder_scan", "kappa_scan"] {
                assert!(m.hasattr(name).unwrap(), "{name}");
            }
        });
    }

    #[test]
    fn bindings_agree_with_the_core() {
        Python::attach(|py| {
            let h = PyHamiltonian::ising_chain(3).unwrap();
            let g = spectral_gap(py, &h, 5.0, 1.5, 1.0, "sin2", None, 64).unwrap();
            let config = ScanConfig {
                beta: 5.0,
                h: 1.5,
                kind: RampKind::Sin2,
                alphas: vec![1.0],
                kappa: Kappa::LargeKappaLimit,
                steps_per_unit_time: 64,
            };
            let core = analysis::instance_gaps(&h.inner, 0, 0, &config).unwrap();
            assert_eq!(g.delta, core[0].delta);

            let sk = PyHamiltonian::sk(4, 3).unwrap();
            let back = PyHamiltonian::from_json(&sk.to_json().unwrap()).unwrap();
            assert_eq!(back.inner, sk.inner);
            assert_eq!(back.seed, Some(3));

            assert!(ising_bound(py, 7, 5.0, 1.5, 1.0, "sin2", 200).is_err());
            let f = fit_scaling(
                vec![4.0, 5.0, 6.0, 7.0],
                (4..8).map(|n| 2f64.powf(-0.3 * n as f64)).collect(),
                None,
                "exponential",
            )
            .unwrap();
            assert!((f.exponent - 0.3).abs() < 1e-12);
        });
    }
}
