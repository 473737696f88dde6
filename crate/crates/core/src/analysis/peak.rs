use serde::{Deserialize, Serialize};

use super::scan::GapCurve;
use crate::error::{invalid, Result};
use crate::freefermion::ising_bound;
use crate::problems::{RampKind, RampSchedule};

/// Largest gap on a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub alpha: f64,
    pub delta: f64,
    pub stderr: f64,
    /// Set when the maximum sits on the first or last grid point.
    pub at_boundary: bool,
}

/// Grid argmax of the mean gap; ties go to the smaller `α`.
pub fn find_peak(curve: &GapCurve) -> Result<Peak> {
    let points = &curve.points;
    let mut best: Option<usize> = None;
    for (i, p) in points.iter().enumerate() {
        if p.count == 0 || !p.mean.is_finite() {
            continue;
        }
        if best.is_none_or(|b| p.mean > points[b].mean) {
            best = Some(i);
        }
    }
    let i = best.ok_or_else(|| invalid("cannot locate the peak of an empty curve"))?;
    Ok(Peak {
        alpha: points[i].alpha,
        delta: points[i].mean,
        stderr: points[i].stderr,
        at_boundary: i == 0 || i + 1 == points.len(),
    })
}

/// Peak of the free-fermion bound over the ramp time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsingPeak {
    pub n: usize,
    pub alpha: f64,
    pub bound: f64,
    pub evaluations: usize,
}

const GRID_START: f64 = 0.125;
const GRID_RATIO: f64 = 1.189_207_115_002_721; // 2^{1/4}
const GRID_LIMIT: f64 = 1e5;

/// Locates the ramp time maximizing [`ising_bound`]: a geometric `α` grid
/// (ratio `2^{1/4}`) is walked until the bound has clearly turned over, and
/// the best bracket is refined by golden-section search in `ln α` to a
/// relative width of `rel_tol`.
pub fn ising_bound_peak(
    n: usize,
    beta: f64,
    h: f64,
    kind: RampKind,
    steps_per_unit_time: usize,
    rel_tol: f64,
) -> Result<IsingPeak> {
    if kind == RampKind::Quench {
        return Err(invalid("peak search needs a ramp shape, not a quench"));
    }
    let mut evaluations = 0;
    let mut eval = |alpha: f64| -> Result<f64> {
        evaluations += 1;
        let s = RampSchedule::new(kind, alpha, crate::problems::Kappa::LargeKappaLimit)?;
        Ok(ising_bound(n, beta, h, &s, steps_per_unit_time)?.bound)
    };
    let quench = eval(0.0)?;
    let mut grid = vec![(0.0, quench)];
    let mut alpha = GRID_START;
    let mut best = 0;
    loop {
        let v = eval(alpha)?;
        grid.push((alpha, v));
        if v > grid[best].1 {
            best = grid.len() - 1;
        }
        let past = grid.len() - 1 - best;
        if (past >= 4 && v < 0.5 * grid[best].1) || past >= 16 {
            break;
        }
        alpha *= GRID_RATIO;
        if alpha > GRID_LIMIT {
            return Err(invalid(format!("bound still rising at α = {GRID_LIMIT:e} for N={n}")));
        }
    }
    if best == 0 {
        return Ok(IsingPeak { n, alpha: 0.0, bound: quench, evaluations });
    }
    let lo = if best == 1 { grid[1].0 / GRID_RATIO } else { grid[best - 1].0 };
    let hi = grid[best + 1].0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (eval(c.exp())?, eval(d.exp())?);
    while b - a > rel_tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c.exp())?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d.exp())?;
        }
    }
    let (alpha, bound) = if fc >= fd { (c.exp(), fc) } else { (d.exp(), fd) };
    let (alpha, bound) = if grid[best].1 > bound { grid[best] } else { (alpha, bound) };
    Ok(IsingPeak { n, alpha, bound, evaluations })
}

#[cfg(test)]
mod tests {
    use super::super::scan::GapPoint;
    use super::*;
    use crate::problems::Kappa;

    fn curve(values: &[(f64, f64)]) -> GapCurve {
        GapCurve {
            model: "synthetic".into(),
            n: 4,
            beta: 1.0,
            h: 1.5,
            kind: RampKind::Sin2,
            kappa: Kappa::LargeKappaLimit,
            points: values.iter().map(|&(alpha, mean)| GapPoint { alpha, mean, stderr: 0.0, count: 1 }).collect(),
        }
    }

    #[test]
    fn unimodal_curve() {
        let c = curve(&[(0.0, 0.1), (1.0, 0.3), (4.0, 0.7), (8.0, 0.5), (16.0, 0.2)]);
        let p = find_peak(&c).unwrap();
        assert_eq!((p.alpha, p.delta, p.at_boundary), (4.0, 0.7, false));
    }

    #[test]
    fn monotone_curve_flags_boundary() {
        let c = curve(&[(0.0, 0.1), (1.0, 0.2), (2.0, 0.3)]);
        assert!(find_peak(&c).unwrap().at_boundary);
    }

    #[test]
    fn ties_go_to_smaller_alpha() {
        let c = curve(&[(0.0, 0.1), (1.0, 0.5), (2.0, 0.5), (3.0, 0.1)]);
        assert_eq!(find_peak(&c).unwrap().alpha, 1.0);
        assert!(find_peak(&curve(&[])).is_err());
    }

    #[test]
    fn bound_peak_is_a_local_maximum() {
        let p = ising_bound_peak(12, 5.0, 1.5, RampKind::Sin2, 100, 1e-4).unwrap();
        assert!(p.alpha > 0.0 && p.bound > 0.0);
        for factor in [0.97, 1.03] {
            let s = RampSchedule::sin2(p.alpha * factor).unwrap();
            assert!(ising_bound(12, 5.0, 1.5, &s, 100).unwrap().bound <= p.bound + 1e-12);
        }
        let quench = ising_bound(12, 5.0, 1.5, &RampSchedule::quench(), 100).unwrap().bound;
        assert!(p.bound > quench);
    }
}
