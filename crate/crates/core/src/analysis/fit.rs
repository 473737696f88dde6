use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Scaling law fitted to gaps `δ(N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitKind {
    /// `δ ∝ 2^{-k N}`, fitted as `log2 δ` against `N`.
    Exponential,
    /// `δ ∝ N^{-γ}`, fitted as `ln δ` against `ln N`.
    #[serde(rename = "powerlaw")]
    PowerLaw,
}

impl FitKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Exponential => "exponential",
            Self::PowerLaw => "powerlaw",
        }
    }
}

impl FromStr for FitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "exponential" | "exp" => Ok(Self::Exponential),
            "powerlaw" | "power" => Ok(Self::PowerLaw),
            other => Err(invalid(format!("unknown fit kind '{other}'"))),
        }
    }
}

/// Weighted least-squares scaling fit.
///
/// `exponent` is the decay exponent: `k` for [`FitKind::Exponential`] and `γ`
/// for [`FitKind::PowerLaw`], so the fitted log-log (or log-linear) slope is
/// `-exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub kind: FitKind,
    pub exponent: f64,
    /// Standard error of the exponent from the parameter covariance.
    pub err: f64,
    pub intercept: f64,
    /// `χ² / (points - 2)`.
    pub chi2_nu: f64,
    pub points_used: usize,
}

impl ScalingFit {
    /// Fitted slope of the linearized model (`-exponent`).
    pub fn slope(&self) -> f64 {
        -self.exponent
    }
}

/// Fits `(N, δ, σ)` points; weights are `1/σ_y²` with `σ_y` the propagated
/// uncertainty of the transformed gap.
pub fn fit_scaling(points: &[(f64, f64, f64)], kind: FitKind) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(invalid(format!("a scaling fit needs at least 3 points, got {}", points.len())));
    }
    let mut rows = Vec::with_capacity(points.len());
    for &(n, delta, sigma) in points {
        if !(delta > 0.0 && sigma > 0.0 && n > 0.0) || !delta.is_finite() || !sigma.is_finite() {
            return Err(invalid(format!("fit points need positive N, gap and error, got ({n}, {delta}, {sigma})")));
        }
        let (x, y, sy) = match kind {
            FitKind::Exponential => (n, delta.log2(), sigma / (delta * std::f64::consts::LN_2)),
            FitKind::PowerLaw => (n.ln(), delta.ln(), sigma / delta),
        };
        rows.push((x, y, 1.0 / (sy * sy)));
    }
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, w) in &rows {
        s += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = s * sxx - sx * sx;
    let spread = rows.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max)
        - rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    if det.is_nan() || det <= 0.0 || spread == 0.0 {
        return Err(invalid("degenerate fit design: all system sizes coincide"));
    }
    let slope = (s * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;
    let chi2: f64 = rows.iter().map(|&(x, y, w)| w * (y - intercept - slope * x).powi(2)).sum();
    Ok(ScalingFit {
        kind,
        exponent: -slope,
        err: (s / det).sqrt(),
        intercept,
        chi2_nu: chi2 / (rows.len() - 2) as f64,
        points_used: rows.len(),
    })
}
