use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::weights::RankedWeights;
use crate::error::{Error, Result};
use crate::params::{PdParams, Regime};

/// When to stop breaking the stick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationRule {
    /// Exactly this many sticks (fewer in the finite regime).
    Fixed(usize),
    /// Stop once the unbroken remainder falls below `eps`, or after `max_sticks`.
    Residual { eps: f64, max_sticks: usize },
}

impl Default for TruncationRule {
    fn default() -> Self {
        TruncationRule::Residual {
            eps: 1e-8,
            max_sticks: 100_000,
        }
    }
}

impl TruncationRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TruncationRule::Fixed(0) => Err(Error::Config("fixed truncation needs K >= 1".into())),
            TruncationRule::Residual { eps, max_sticks } => {
                if !(eps > 0.0) {
                    Err(Error::Config(format!(
                        "truncation threshold must be positive, got {eps}"
                    )))
                } else if max_sticks == 0 {
                    Err(Error::Config("max_sticks must be >= 1".into()))
                } else {
                    Ok(())
                }
            }
            TruncationRule::Fixed(_) => Ok(()),
        }
    }

    /// Upper bound on the number of sticks broken.
    pub fn cap(&self) -> usize {
        match *self {
            TruncationRule::Fixed(k) => k,
            TruncationRule::Residual { max_sticks, .. } => max_sticks,
        }
    }

    fn done(&self, remaining: f64) -> bool {
        match *self {
            TruncationRule::Fixed(_) => false,
            TruncationRule::Residual { eps, .. } => remaining < eps,
        }
    }
}

/// `Beta(a, b)` through two independent unit-scale gammas.
pub fn sample_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let x = Gamma::new(a, 1.0).expect("positive shape").sample(rng);
    let y = Gamma::new(b, 1.0).expect("positive shape").sample(rng);
    let s = x + y;
    if s > 0.0 {
        x / s
    } else {
        a / (a + b)
    }
}

/// Stick-breaking output in generation (size-biased) order.
#[derive(Debug, Clone, PartialEq)]
pub struct Sticks {
    /// Beta fractions `z_k`.
    pub fractions: Vec<f64>,
    /// Pieces `x_k = z_k prod_{j<k} (1 - z_j)`.
    pub pieces: Vec<f64>,
    /// `prod_k (1 - z_k)` after the last piece.
    pub residual: f64,
}

impl Sticks {
    pub fn ranked(&self) -> RankedWeights {
        RankedWeights::from_pieces(self.pieces.clone(), self.residual)
    }
}

/// Size-biased stick-breaking with `z_k ~ Beta(1 - alpha, theta + alpha k)`.
///
/// In the finite regime the `m`-th stick takes the whole remainder, so the
/// sequence ends after `m` pieces with zero residual.
pub fn break_sticks<R: Rng + ?Sized>(p: &PdParams, trunc: TruncationRule, rng: &mut R) -> Result<Sticks> {
    trunc.validate()?;
    let (alpha, theta) = (p.alpha(), p.theta());
    let limit = match p.regime() {
        Regime::Finite { m } => m.min(trunc.cap()),
        Regime::Infinite => trunc.cap(),
    };
    let last_piece = p.parts();
    let first = Gamma::new(1.0 - alpha, 1.0).map_err(|e| Error::Domain(e.to_string()))?;

    let mut fractions = Vec::new();
    let mut pieces = Vec::new();
    let mut remaining = 1.0;
    for k in 1..=limit {
        let z = if last_piece == Some(k) {
            1.0
        } else {
            let b = theta + alpha * k as f64;
            let x = first.sample(rng);
            let y = Gamma::new(b, 1.0)
                .map_err(|e| Error::Domain(e.to_string()))?
                .sample(rng);
            if x + y > 0.0 {
                x / (x + y)
            } else {
                (1.0 - alpha) / (1.0 - alpha + b)
            }
        };
        fractions.push(z);
        pieces.push(z * remaining);
        remaining *= 1.0 - z;
        if trunc.done(remaining) {
            break;
        }
    }
    Ok(Sticks {
        fractions,
        pieces,
        residual: remaining,
    })
}

/// Ranked two-parameter Poisson-Dirichlet sample by size-biased stick-breaking.
pub fn sample_sticks_size_biased<R: Rng + ?Sized>(
    p: &PdParams,
    trunc: TruncationRule,
    rng: &mut R,
) -> Result<RankedWeights> {
    Ok(break_sticks(p, trunc, rng)?.ranked())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::RngSeed;

    #[test]
    fn truncation_validation() {
        assert!(TruncationRule::Fixed(0).validate().is_err());
        assert!(TruncationRule::Residual {
            eps: 0.0,
            max_sticks: 10
        }
        .validate()
        .is_err());
        assert!(TruncationRule::Residual {
            eps: -1.0,
            max_sticks: 10
        }
        .validate()
        .is_err());
        assert!(TruncationRule::default().validate().is_ok());
        let p = PdParams::new(0.5, 1.0).unwrap();
        let mut rng = RngSeed(0).rng();
        assert!(matches!(
            break_sticks(&p, TruncationRule::Fixed(0), &mut rng),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn finite_regime_stops_at_m() {
        let p = PdParams::finite(-0.7, 5).unwrap();
        let mut rng = RngSeed(2).rng();
        for _ in 0..100 {
            let s = break_sticks(&p, TruncationRule::default(), &mut rng).unwrap();
            assert_eq!(s.pieces.len(), 5);
            assert_eq!(s.residual, 0.0);
            s.ranked().check().unwrap();
        }
    }

    #[test]
    fn fixed_rule_gives_k_pieces() {
        let p = PdParams::new(0.3, 2.0).unwrap();
        let mut rng = RngSeed(3).rng();
        let w = sample_sticks_size_biased(&p, TruncationRule::Fixed(25), &mut rng).unwrap();
        assert_eq!(w.len(), 25);
        assert!(w.residual() > 0.0);
        w.check().unwrap();
    }

    #[test]
    fn residual_rule_meets_threshold() {
        let p = PdParams::new(0.0, 3.0).unwrap();
        let mut rng = RngSeed(4).rng();
        let w = sample_sticks_size_biased(&p, TruncationRule::default(), &mut rng).unwrap();
        assert!(w.residual() < 1e-8);
        w.check().unwrap();
    }

    #[test]
    fn first_stick_mean() {
        let (alpha, theta) = (0.4, 2.0);
        let p = PdParams::new(alpha, theta).unwrap();
        let mut rng = RngSeed(9).rng();
        let n = 100_000;
        let mean = (0..n)
            .map(|_| {
                break_sticks(&p, TruncationRule::Fixed(1), &mut rng)
                    .unwrap()
                    .fractions[0]
            })
            .sum::<f64>()
            / n as f64;
        let (a, b) = (1.0 - alpha, theta + alpha);
        let sd = (a * b / ((a + b).powi(2) * (a + b + 1.0)) / n as f64).sqrt();
        assert!((mean - a / (a + b)).abs() < 3.0 * sd, "mean {mean}");
    }

    #[test]
    fn ewens_fractions_are_iid_beta() {
        let theta = 4.0;
        let p = PdParams::new(0.0, theta).unwrap();
        let mut rng = RngSeed(10).rng();
        let draws = 50_000;
        let mut sums = [0.0; 4];
        for _ in 0..draws {
            let s = break_sticks(&p, TruncationRule::Fixed(4), &mut rng).unwrap();
            for (acc, z) in sums.iter_mut().zip(&s.fractions) {
                *acc += z;
            }
        }
        let want = 1.0 / (1.0 + theta);
        let sd = (theta / ((1.0 + theta).powi(2) * (2.0 + theta)) / draws as f64).sqrt();
        for s in sums {
            assert!((s / draws as f64 - want).abs() < 3.0 * sd);
        }
    }

    #[test]
    fn same_seed_same_sample() {
        let p = PdParams::new(0.6, 55.0).unwrap();
        let a = sample_sticks_size_biased(&p, TruncationRule::Fixed(200), &mut RngSeed(1).rng()).unwrap();
        let b = sample_sticks_size_biased(&p, TruncationRule::Fixed(200), &mut RngSeed(1).rng()).unwrap();
        assert_eq!(a, b);
    }
}
