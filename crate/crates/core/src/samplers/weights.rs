use crate::error::{Error, Result};

const MASS_TOL: f64 = 1e-12;

/// Descending weights in the Kingman simplex plus the mass left unassigned
/// by truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedWeights {
    weights: Vec<f64>,
    residual: f64,
}

impl RankedWeights {
    /// Ranks `pieces` descending (stable, so ties keep generation order).
    pub fn from_pieces(mut pieces: Vec<f64>, residual: f64) -> Self {
        pieces.sort_by(|a, b| b.total_cmp(a));
        let out = Self {
            weights: pieces,
            residual: residual.max(0.0),
        };
        debug_assert!(out.check().is_ok(), "{:?}", out.check());
        out
    }

    /// Validates ordering, range and mass balance.
    pub fn check(&self) -> Result<()> {
        if self.weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::Data("weights must lie in [0, 1]".into()));
        }
        if self.weights.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Data("weights must be descending".into()));
        }
        let total = self.weights.iter().sum::<f64>() + self.residual;
        if (total - 1.0).abs() > MASS_TOL * (1.0 + self.weights.len() as f64).sqrt() {
            return Err(Error::Data(format!("weights and residual sum to {total}")));
        }
        Ok(())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Largest weight, or zero for an empty vector.
    pub fn top(&self) -> f64 {
        self.weights.first().copied().unwrap_or(0.0)
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }
}

/// Sorts non-negative values descending and divides by their sum.
pub fn rank_normalize(values: &[f64]) -> Result<RankedWeights> {
    if let Some(bad) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::Data(format!(
            "values must be finite and non-negative, got {bad}"
        )));
    }
    let total: f64 = values.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Data("at least one value must be positive".into()));
    }
    let pieces = values.iter().map(|v| v / total).collect();
    Ok(RankedWeights::from_pieces(pieces, 0.0))
}
