use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::weights::RankedWeights;
use crate::error::{Error, Result};

/// Unranked gamma-normalised Dirichlet draw together with the gamma total.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaDirichlet {
    /// `y_i / S` in generation order.
    pub weights: Vec<f64>,
    /// `S = sum y_i`, distributed as `Gamma(m * alpha, 1)`.
    pub total: f64,
}

impl GammaDirichlet {
    pub fn ranked(&self) -> RankedWeights {
        RankedWeights::from_pieces(self.weights.clone(), 0.0)
    }
}

fn check(m: usize, alpha: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::Domain("Dirichlet dimension m must be >= 1".into()));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!(
            "Dirichlet shape must be positive, got {alpha}"
        )));
    }
    Ok(())
}

/// Draws `m` i.i.d. `Gamma(alpha, 1)` variables and normalises by their sum.
pub fn sample_gamma_dirichlet<R: Rng + ?Sized>(m: usize, alpha: f64, rng: &mut R) -> Result<GammaDirichlet> {
    check(m, alpha)?;
    let gamma = Gamma::new(alpha, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
    let mut ys: Vec<f64> = (0..m).map(|_| gamma.sample(rng)).collect();
    let total: f64 = ys.iter().sum();
    if total > 0.0 {
        ys.iter_mut().for_each(|y| *y /= total);
    } else {
        // all draws underflowed to zero
        ys.iter_mut().for_each(|y| *y = 1.0 / m as f64);
    }
    Ok(GammaDirichlet { weights: ys, total })
}

/// Ranked symmetric `Dir_m(alpha)` sample; residual is zero.
pub fn sample_symmetric_dirichlet<R: Rng + ?Sized>(
    m: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<RankedWeights> {
    Ok(sample_gamma_dirichlet(m, alpha, rng)?.ranked())
}
