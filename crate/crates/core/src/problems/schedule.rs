use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Shape of the ramp-up segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RampKind {
    /// `sin^2((π/2) sin^2(π t / 2α))`.
    Sin2,
    /// `t / α`.
    Linear,
    /// No ramp (`α = 0`).
    Quench,
}

impl std::str::FromStr for RampKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sin2" => Ok(Self::Sin2),
            "linear" => Ok(Self::Linear),
            "quench" => Ok(Self::Quench),
            other => Err(invalid(format!("unknown ramp kind '{other}'"))),
        }
    }
}

impl RampKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Sin2 => "sin2",
            Self::Linear => "linear",
            Self::Quench => "quench",
        }
    }
}

/// Plateau duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Kappa {
    Finite(f64),
    /// Time-averaged limit of an infinitely long plateau.
    LargeKappaLimit,
}

/// Three-stage protocol: ramp-up over `α`, plateau of length `κ` at `γ = 1`,
/// and the time-reversed ramp-down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampSchedule {
    kind: RampKind,
    alpha: f64,
    kappa: Kappa,
}

impl RampSchedule {
    /// A ramp of the given kind. `α = 0` always yields a quench.
    pub fn new(kind: RampKind, alpha: f64, kappa: Kappa) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(invalid(format!("ramp time must be finite and >= 0, got {alpha}")));
        }
        if let Kappa::Finite(k) = kappa {
            if !k.is_finite() || k < 0.0 {
                return Err(invalid(format!("plateau duration must be finite and >= 0, got {k}")));
            }
        }
        let kind = match kind {
            RampKind::Quench if alpha != 0.0 => {
                return Err(invalid("a quench has ramp time exactly 0"));
            }
            _ if alpha == 0.0 => RampKind::Quench,
            k => k,
        };
        Ok(Self { kind, alpha, kappa })
    }

    pub fn sin2(alpha: f64) -> Result<Self> {
        Self::new(RampKind::Sin2, alpha, Kappa::LargeKappaLimit)
    }

    pub fn linear(alpha: f64) -> Result<Self> {
        Self::new(RampKind::Linear, alpha, Kappa::LargeKappaLimit)
    }

    pub fn quench() -> Self {
        Self { kind: RampKind::Quench, alpha: 0.0, kappa: Kappa::LargeKappaLimit }
    }

    pub fn with_kappa(self, kappa: Kappa) -> Result<Self> {
        Self::new(self.kind, self.alpha, kappa)
    }

    pub fn kind(&self) -> RampKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kappa(&self) -> Kappa {
        self.kappa
    }

    /// Total protocol length `2α + κ`, if the plateau is finite.
    pub fn duration(&self) -> Option<f64> {
        match self.kappa {
            Kappa::Finite(k) => Some(2.0 * self.alpha + k),
            Kappa::LargeKappaLimit => None,
        }
    }

    /// Ramp-up value `γ_1(t)` for `t ∈ [0, α]`, evaluated without range checks.
    #[inline]
    pub fn ramp_up(&self, t: f64) -> f64 {
        match self.kind {
            RampKind::Quench => 1.0,
            RampKind::Linear => t / self.alpha,
            RampKind::Sin2 => {
                let inner = (PI * t / (2.0 * self.alpha)).sin();
                let outer = (0.5 * PI * inner * inner).sin();
                outer * outer
            }
        }
    }

    /// `γ(t)` over the full protocol window.
    ///
    /// With a finite plateau the window is `[0, 2α + κ]` and the ramp-down is the
    /// mirror image of the ramp-up. In the large-κ limit only the ramp-up
    /// segment `[0, α]` is addressable.
    pub fn value(&self, t: f64) -> Result<f64> {
        let end = self.duration().unwrap_or(self.alpha);
        if !(0.0..=end).contains(&t) {
            return Err(Error::OutsideWindow { t, end });
        }
        if self.kind == RampKind::Quench {
            return Ok(1.0);
        }
        // distance to the nearest protocol edge, identical for t and end - t
        let from_edge = match self.kappa {
            Kappa::Finite(_) => t.min(end - t),
            Kappa::LargeKappaLimit => t,
        };
        Ok(if from_edge >= self.alpha { 1.0 } else { self.ramp_up(from_edge) })
    }
}

/// `γ(t)` for schedule `s`.
pub fn ramp_value(s: &RampSchedule, t: f64) -> Result<f64> {
    s.value(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sin2_midpoint_is_one_half() {
        let s = RampSchedule::sin2(3.0).unwrap();
        assert!((s.value(1.5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn boundary_values() {
        for s in [RampSchedule::sin2(2.5).unwrap(), RampSchedule::linear(2.5).unwrap()] {
            assert_eq!(s.value(0.0).unwrap(), 0.0);
            assert!((s.value(2.5).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_quarter() {
        let s = RampSchedule::linear(4.0).unwrap();
        assert_eq!(s.value(1.0).unwrap(), 0.25);
    }

    #[test]
    fn plateau_and_window() {
        let s = RampSchedule::sin2(1.0).unwrap().with_kappa(Kappa::Finite(4.0)).unwrap();
        assert_eq!(s.value(3.0).unwrap(), 1.0);
        assert_eq!(s.value(6.0).unwrap(), 0.0);
        assert!(s.value(6.5).is_err());
        assert!(s.value(-0.1).is_err());
        let inf = RampSchedule::sin2(1.0).unwrap();
        assert!(inf.value(1.5).is_err());
    }

    #[test]
    fn zero_alpha_is_quench() {
        let s = RampSchedule::sin2(0.0).unwrap();
        assert_eq!(s.kind(), RampKind::Quench);
        assert!(RampSchedule::new(RampKind::Quench, 1.0, Kappa::LargeKappaLimit).is_err());
        assert!(RampSchedule::sin2(-1.0).is_err());
    }

    #[test]
    fn dyadic_grid_is_exactly_time_symmetric() {
        for kind in [RampKind::Sin2, RampKind::Linear] {
            let s = RampSchedule::new(kind, 1.5, Kappa::Finite(2.25)).unwrap();
            let end = s.duration().unwrap();
            for j in 0..=512 {
                let t = end * j as f64 / 512.0;
                assert_eq!(s.value(t).unwrap(), s.value(end - t).unwrap());
            }
        }
    }

    proptest! {
        #[test]
        fn time_reversal_symmetry(alpha in 0.01f64..20.0, kappa in 0.0f64..30.0, u in 0.0f64..=1.0, linear in any::<bool>()) {
            let kind = if linear { RampKind::Linear } else { RampKind::Sin2 };
            let s = RampSchedule::new(kind, alpha, Kappa::Finite(kappa)).unwrap();
            let end = s.duration().unwrap();
            let t = u * end;
            let a = s.value(t).unwrap();
            let b = s.value(end - t).unwrap();
            prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
