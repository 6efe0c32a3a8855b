//! Ranked jumps of a tempered stable subordinator run for a gamma time.
//!
//! The Lévy density is `nu(y) = alpha / Gamma(1 - alpha) * y^(-alpha-1) e^(-y)`.
//! Over a time window `T ~ Gamma(theta / alpha, 1)` the jumps, largest first,
//! are `eta_i = N^{-1}(G_i / T)` where `N` is the tail mass of `nu` and
//! `G_i` are the arrival times of a unit-rate Poisson process. The sum of all
//! jumps is `Gamma(theta, 1)` and the normalised ranked jumps are
//! `PD(alpha, theta)`, independent of the sum.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use super::weights::RankedWeights;
use crate::error::{Error, Result};
use crate::params::{PdParams, Regime};

const LN_X_MIN: f64 = -690.0;
const LN_X_MAX: f64 = 6.55; // x ~ 700
const GRID_STEP: f64 = 0.05;
const REL_TOL: f64 = 1e-10;

/// Tail mass `N(x) = int_x^inf nu(y) dy` of the tempered stable Lévy measure,
/// tabulated on a log grid for fast inversion.
#[derive(Debug, Clone)]
pub struct TemperedStableTail {
    alpha: f64,
    ln_gamma_1ma: f64,
    ln_x: Vec<f64>,
    ln_tail: Vec<f64>,
}

/// `ln Gamma(a, x)` (unregularised upper incomplete gamma) for `x > 1` by
/// modified Lentz evaluation of the continued fraction. Valid for negative `a`.
fn ln_upper_gamma_cf(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    -x + a * x.ln() + h.ln()
}

impl TemperedStableTail {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!(
                "tempered stable index must be in (0,1), got {alpha}"
            )));
        }
        let mut tail = Self {
            alpha,
            ln_gamma_1ma: ln_gamma(1.0 - alpha),
            ln_x: Vec::new(),
            ln_tail: Vec::new(),
        };
        let points = ((LN_X_MAX - LN_X_MIN) / GRID_STEP).ceil() as usize + 1;
        tail.ln_x = (0..points).map(|i| LN_X_MIN + i as f64 * GRID_STEP).collect();
        tail.ln_tail = tail.ln_x.iter().map(|&y| tail.ln_tail_at(y.exp())).collect();
        Ok(tail)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `ln N(x)`.
    pub fn ln_tail_at(&self, x: f64) -> f64 {
        let a = self.alpha;
        if x <= 1.0 {
            // N(x) = x^-a e^-x / Gamma(1-a) - Q(1-a, x)
            let lead = (-a * x.ln() - x - self.ln_gamma_1ma).exp();
            (lead - gamma_ur(1.0 - a, x)).ln()
        } else {
            a.ln() - self.ln_gamma_1ma + ln_upper_gamma_cf(-a, x)
        }
    }

    pub fn tail(&self, x: f64) -> f64 {
        self.ln_tail_at(x).exp()
    }

    /// Lévy density `nu(x)`.
    pub fn density(&self, x: f64) -> f64 {
        let a = self.alpha;
        (a.ln() - self.ln_gamma_1ma - (a + 1.0) * x.ln() - x).exp()
    }

    /// Expected total size of jumps below `x` per unit time:
    /// `int_0^x y nu(y) dy = alpha * P(1 - alpha, x)`.
    pub fn small_jump_mass(&self, x: f64) -> f64 {
        self.alpha * gamma_lr(1.0 - self.alpha, x)
    }

    /// Solves `N(x) = level` for `x`.
    pub fn inverse(&self, level: f64) -> f64 {
        let target = level.ln();
        let last = self.ln_tail.len() - 1;
        if target >= self.ln_tail[0] {
            // N(x) ~ x^-a / Gamma(1-a) far below the grid
            return ((-self.ln_gamma_1ma - target) / self.alpha).exp();
        }
        if target <= self.ln_tail[last] {
            return self.ln_x[last].exp();
        }
        // ln_tail is decreasing: find i with ln_tail[i] > target >= ln_tail[i+1]
        let i = self.ln_tail.partition_point(|&v| v > target) - 1;
        let (mut lo, mut hi) = (self.ln_x[i], self.ln_x[i + 1]);
        let (t_lo, t_hi) = (self.ln_tail[i], self.ln_tail[i + 1]);
        let mut y = lo + (t_lo - target) / (t_lo - t_hi) * (hi - lo);
        for _ in 0..60 {
            let x = y.exp();
            let g = self.ln_tail_at(x) - target;
            if g > 0.0 {
                lo = y;
            } else {
                hi = y;
            }
            // d ln N / d ln x = -x nu(x) / N(x)
            let slope = -x * self.density(x) / (g + target).exp();
            let mut next = y - g / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - y).abs() < REL_TOL {
                return next.exp();
            }
            y = next;
        }
        y.exp()
    }
}

/// One draw from the subordinator representation.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatorSample {
    /// Normalised ranked jumps `eta_i / S`; the residual is the estimated
    /// share of all jumps smaller than the last one kept.
    pub weights: RankedWeights,
    /// `S`: kept jumps plus the expected small-jump mass.
    pub total: f64,
    /// The gamma time horizon `T`.
    pub horizon: f64,
}

/// Reusable sampler; the tail table depends only on `alpha`.
#[derive(Debug, Clone)]
pub struct TemperedStableSubordinator {
    tail: TemperedStableTail,
    horizon: Gamma<f64>,
}

impl TemperedStableSubordinator {
    /// Requires `0 < alpha < 1` and `theta > 0`.
    pub fn new(p: &PdParams) -> Result<Self> {
        let (alpha, theta) = (p.alpha(), p.theta());
        if p.regime() != Regime::Infinite || alpha == 0.0 {
            return Err(Error::Unsupported(format!(
                "subordinator representation needs 0 < alpha < 1, got {p}"
            )));
        }
        if !(theta > 0.0) {
            return Err(Error::Domain(format!(
                "subordinator representation needs theta > 0, got {theta}"
            )));
        }
        Ok(Self {
            tail: TemperedStableTail::new(alpha)?,
            horizon: Gamma::new(theta / alpha, 1.0).map_err(|e| Error::Domain(e.to_string()))?,
        })
    }

    pub fn tail(&self) -> &TemperedStableTail {
        &self.tail
    }

    pub fn sample<R: Rng + ?Sized>(&self, n_jumps: usize, rng: &mut R) -> Result<SubordinatorSample> {
        if n_jumps == 0 {
            return Err(Error::Config("n_jumps must be >= 1".into()));
        }
        let horizon = self.horizon.sample(rng);
        let mut arrival = 0.0;
        let mut jumps = Vec::with_capacity(n_jumps);
        for _ in 0..n_jumps {
            let e: f64 = Exp1.sample(rng);
            arrival += e;
            jumps.push(self.tail.inverse(arrival / horizon));
        }
        let smallest = *jumps.last().expect("n_jumps >= 1");
        let leftover = horizon * self.tail.small_jump_mass(smallest);
        let total = jumps.iter().sum::<f64>() + leftover;
        let pieces = jumps.iter().map(|j| j / total).collect();
        Ok(SubordinatorSample {
            weights: RankedWeights::from_pieces(pieces, leftover / total),
            total,
            horizon,
        })
    }
}

/// Convenience wrapper building the tail table for a single draw.
pub fn sample_subordinator<R: Rng + ?Sized>(
    p: &PdParams,
    n_jumps: usize,
    rng: &mut R,
) -> Result<SubordinatorSample> {
    TemperedStableSubordinator::new(p)?.sample(n_jumps, rng)
}
