//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qmcmc_core::linalg::ComplexMatrix;
use qmcmc_core::problems::{ClassicalHamiltonian, RampSchedule};

/// `-i H(γ) ψ` for every column of `psi`, with `H = diag(E) + γ h Σ σ^x`.
fn apply_generator(energies: &[f64], n: usize, field: f64, gamma: f64, psi: &[Complex64], out: &mut [Complex64]) {
    let dim = energies.len();
    let minus_i = Complex64::new(0.0, -1.0);
    for x in 0..dim {
        let mut acc = psi[x] * energies[x];
        for b in 0..n {
            acc += psi[x ^ (1 << b)] * (gamma * field);
        }
        out[x] = minus_i * acc;
    }
}

/// Ramp-up propagator from classical fourth-order Runge-Kutta on the full
/// state space with `steps` uniform steps.
pub fn rk4_ramp(h: &ClassicalHamiltonian, field: f64, schedule: &RampSchedule, steps: usize) -> ComplexMatrix {
    let energies = h.energy_table().unwrap();
    let n = h.n();
    let dim = energies.len();
    let alpha = schedule.alpha();
    let dt = alpha / steps as f64;
    let mut out = ComplexMatrix::zeros(dim, dim);
    let mut k = vec![vec![Complex64::new(0.0, 0.0); dim]; 4];
    let mut tmp = vec![Complex64::new(0.0, 0.0); dim];
    for col in 0..dim {
        let mut psi = vec![Complex64::new(0.0, 0.0); dim];
        psi[col] = Complex64::new(1.0, 0.0);
        for m in 0..steps {
            let t = m as f64 * dt;
            let (g0, g1, g2) = (schedule.ramp_up(t), schedule.ramp_up(t + 0.5 * dt), schedule.ramp_up(t + dt));
            apply_generator(&energies, n, field, g0, &psi, &mut k[0]);
            for x in 0..dim {
                tmp[x] = psi[x] + k[0][x] * (0.5 * dt);
            }
            apply_generator(&energies, n, field, g1, &tmp, &mut k[1]);
            for x in 0..dim {
                tmp[x] = psi[x] + k[1][x] * (0.5 * dt);
            }
            apply_generator(&energies, n, field, g1, &tmp, &mut k[2]);
            for x in 0..dim {
                tmp[x] = psi[x] + k[2][x] * dt;
            }
            apply_generator(&energies, n, field, g2, &tmp, &mut k[3]);
            for (x, p) in psi.iter_mut().enumerate() {
                *p += (k[0][x] + k[1][x] * 2.0 + k[2][x] * 2.0 + k[3][x]) * (dt / 6.0);
            }
        }
        for (x, p) in psi.iter().enumerate() {
            out.set(x, col, *p);
        }
    }
    out
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].powi(2))
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Metropolis matrix `P[from][to]` assembled term by term from a proposal
/// `q[to][from] = Q(to|from)` and raw energies.
pub fn scalar_metropolis(q: &dyn Fn(usize, usize) -> f64, energies: &[f64], beta: f64) -> Vec<Vec<f64>> {
    let dim = energies.len();
    let mut p = vec![vec![0.0; dim]; dim];
    for y in 0..dim {
        let mut out = 0.0;
        for x in 0..dim {
            if x != y {
                let a = f64::min(1.0, (-beta * (energies[x] - energies[y])).exp());
                p[y][x] = q(x, y) * a;
                out += p[y][x];
            }
        }
        p[y][y] = 1.0 - out;
    }
    p
}

/// Spectral gap of a reversible chain from the Jacobi oracle.
pub fn scalar_gap(p: &[Vec<f64>], energies: &[f64], beta: f64) -> f64 {
    let dim = energies.len();
    let w: Vec<f64> = energies.iter().map(|e| (-beta * e).exp()).collect();
    let z: f64 = w.iter().sum();
    let pi: Vec<f64> = w.iter().map(|v| v / z).collect();
    let s = DMatrix::from_fn(dim, dim, |i, j| (pi[i] / pi[j]).sqrt() * p[i][j]);
    let s = (&s + s.transpose()) * 0.5;
    let ev = jacobi_eigenvalues(&s);
    let second = ev[..dim - 1].iter().map(|v| v.abs()).fold(0.0, f64::max);
    1.0 - second
}

/// `max |a - b|` over two complex matrices.
pub fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.max_abs_diff(b)
}

/// Ramp-up propagator as a product of exact exponentials of `H(γ)` frozen at
/// each step midpoint (dense eigendecomposition per step).
pub fn piecewise_exponential_ramp(
    h: &ClassicalHamiltonian,
    field: f64,
    schedule: &RampSchedule,
    steps: usize,
) -> ComplexMatrix {
    let energies = h.energy_table().unwrap();
    let n = h.n();
    let dim = energies.len();
    let dt = schedule.alpha() / steps as f64;
    let mut u = ComplexMatrix::identity(dim);
    for m in 0..steps {
        let gamma = schedule.ramp_up((m as f64 + 0.5) * dt);
        let mut hm = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(energies.clone()));
        for x in 0..dim {
            for b in 0..n {
                hm[(x, x ^ (1 << b))] = gamma * field;
            }
        }
        let eig = hm.symmetric_eigen();
        let v = &eig.eigenvectors;
        let proj = u.left_mul_real(&v.transpose());
        let mut phased = ComplexMatrix::zeros(dim, dim);
        for r in 0..dim {
            let (s, c) = (-eig.eigenvalues[r] * dt).sin_cos();
            for col in 0..dim {
                let z = proj.get(r, col) * Complex64::new(c, s);
                phased.set(r, col, z);
            }
        }
        u = phased.left_mul_real(v);
    }
    u
}
