use std::fmt;

use crate::error::{Error, Result};

/// The two admissible parameter regimes of the two-parameter family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// `0 <= alpha < 1`, `theta > -alpha`: infinitely many blocks.
    Infinite,
    /// `alpha < 0`, `theta = m * |alpha|`: symmetric Dirichlet on `m` parts.
    Finite { m: usize },
}

/// Validated `(alpha, theta)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdParams {
    alpha: f64,
    theta: f64,
    regime: Regime,
}

const INTEGER_TOL: f64 = 1e-9;

impl PdParams {
    /// Accepts either regime. For negative `alpha` the ratio `theta / |alpha|`
    /// must be a positive integer (to within `1e-9`).
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        if !alpha.is_finite() || !theta.is_finite() {
            return Err(Error::Domain(format!(
                "alpha and theta must be finite, got ({alpha}, {theta})"
            )));
        }
        if alpha >= 0.0 {
            if alpha >= 1.0 {
                return Err(Error::Domain(format!("alpha must be < 1, got {alpha}")));
            }
            if theta <= -alpha {
                return Err(Error::Domain(format!(
                    "theta must exceed -alpha = {}, got {theta}",
                    -alpha
                )));
            }
            return Ok(Self {
                alpha,
                theta,
                regime: Regime::Infinite,
            });
        }
        let ratio = theta / -alpha;
        let m = ratio.round();
        if m < 1.0 || (ratio - m).abs() > INTEGER_TOL * m.max(1.0) {
            return Err(Error::Domain(format!(
                "alpha < 0 requires theta = m*|alpha| for a positive integer m, got theta/|alpha| = {ratio}"
            )));
        }
        Self::finite(alpha, m as usize)
    }

    /// Finite regime: `alpha < 0`, `theta = m * |alpha|`.
    pub fn finite(alpha: f64, m: usize) -> Result<Self> {
        if !(alpha < 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!(
                "finite regime needs alpha < 0, got {alpha}"
            )));
        }
        if m == 0 {
            return Err(Error::Domain("finite regime needs m >= 1".into()));
        }
        Ok(Self {
            alpha,
            theta: m as f64 * -alpha,
            regime: Regime::Finite { m },
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// Number of parts in the finite regime.
    pub fn parts(&self) -> Option<usize> {
        match self.regime {
            Regime::Finite { m } => Some(m),
            Regime::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.regime, Regime::Infinite)
    }
}

impl fmt::Display for PdParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PD({}, {})", self.alpha, self.theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes() {
        assert_eq!(PdParams::new(0.5, 1.0).unwrap().regime(), Regime::Infinite);
        assert_eq!(PdParams::new(0.0, 2.0).unwrap().regime(), Regime::Infinite);
        assert_eq!(PdParams::new(0.5, -0.3).unwrap().regime(), Regime::Infinite);
        let b = PdParams::new(-1.0, 2.0).unwrap();
        assert_eq!(b.regime(), Regime::Finite { m: 2 });
        assert_eq!(b.parts(), Some(2));
        assert_eq!(PdParams::finite(-0.25, 4).unwrap().theta(), 1.0);
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(PdParams::new(1.0, 1.0).is_err());
        assert!(PdParams::new(0.0, 0.0).is_err());
        assert!(PdParams::new(0.3, -0.3).is_err());
        assert!(PdParams::new(-1.0, 2.5).is_err());
        assert!(PdParams::new(-1.0, 0.0).is_err());
        assert!(PdParams::new(f64::NAN, 1.0).is_err());
        assert!(PdParams::finite(0.1, 3).is_err());
        assert!(PdParams::finite(-0.1, 0).is_err());
        assert!(matches!(PdParams::new(2.0, 1.0), Err(Error::Domain(_))));
    }
}
