//! Exact Ewens and Pitman sampling formulas over partition classes.
//!
//! Everything is computed in natural-log space; a zero probability is the
//! `-inf` sentinel of [`LogProb`].

use std::collections::HashMap;
use std::sync::OnceLock;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::params::PdParams;
use crate::partition::{down_neighbors, enumerate_shapes, FrequencyVector, PartitionClass};

/// Natural log of a probability. `-inf` encodes probability zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProb(f64);

impl LogProb {
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);
    pub const ONE: LogProb = LogProb(0.0);

    /// Wraps a log value; small positive round-off is clamped to zero.
    pub fn new(value: f64) -> Self {
        debug_assert!(!value.is_nan());
        LogProb(value.min(0.0))
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn prob(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

/// Table of `ln k!` for `k <= cap`, falling back to `ln_gamma` above it.
#[derive(Debug, Clone)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub const DEFAULT_CAP: usize = 1_000_000;

    pub fn with_cap(cap: usize) -> Self {
        let mut table = Vec::with_capacity(cap + 1);
        table.push(0.0);
        let mut acc = 0.0;
        for k in 1..=cap {
            acc += (k as f64).ln();
            table.push(acc);
        }
        Self { table }
    }

    /// Shared process-wide table with the default cap, built on first use.
    pub fn global() -> &'static LogFactorials {
        static TABLE: OnceLock<LogFactorials> = OnceLock::new();
        TABLE.get_or_init(|| LogFactorials::with_cap(Self::DEFAULT_CAP))
    }

    pub fn ln_factorial(&self, k: usize) -> f64 {
        match self.table.get(k) {
            Some(&v) => v,
            None => ln_gamma(k as f64 + 1.0),
        }
    }
}

fn ln_factorial(k: usize) -> f64 {
    LogFactorials::global().ln_factorial(k)
}

/// `ln prod_{j=0}^{n-1} (x + j*step)`; the empty product is zero.
///
/// Fails with a domain error if any factor is non-positive.
pub fn rising_factorial_log(x: f64, n: usize, step: f64) -> Result<f64> {
    let mut acc = 0.0;
    for j in 0..n {
        let factor = x + j as f64 * step;
        if !(factor > 0.0) {
            return Err(Error::Domain(format!(
                "rising factorial factor {j} is {factor} (x={x}, step={step})"
            )));
        }
        acc += factor.ln();
    }
    Ok(acc)
}

/// `ln n! - sum_j ln c_j!`, the multinomial part shared by both formulas.
fn ln_arrangements(c: &PartitionClass) -> f64 {
    ln_factorial(c.n()) - c.sizes().map(|(_, count)| ln_factorial(count)).sum::<f64>()
}

/// Ewens sampling formula: `theta^k / theta^(n) * n! / prod(c_j! j^{c_j})`.
pub fn esf_log_prob(c: &PartitionClass, theta: f64) -> Result<LogProb> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::Domain(format!(
            "Ewens formula needs theta > 0, got {theta}"
        )));
    }
    let (n, k) = (c.n(), c.k());
    if n == 0 {
        return Ok(LogProb::ONE);
    }
    let sizes: f64 = c.sizes().map(|(j, count)| count as f64 * (j as f64).ln()).sum();
    let value = k as f64 * theta.ln() - rising_factorial_log(theta, n, 1.0)? + ln_arrangements(c) - sizes;
    Ok(LogProb::new(value))
}

/// Pitman sampling formula for either parameter regime.
///
/// The leading factor `theta` of `theta^(k, alpha)` and `theta^(n)` is
/// cancelled, so the whole range `theta > -alpha` is covered. In the finite
/// regime a class with more than `m` blocks hits a zero factor and gets
/// probability zero.
pub fn psf_log_prob(c: &PartitionClass, p: &PdParams) -> Result<LogProb> {
    let (alpha, theta) = (p.alpha(), p.theta());
    let (n, k) = (c.n(), c.k());
    if n == 0 {
        return Ok(LogProb::ONE);
    }
    let mut numer = 0.0;
    for j in 1..k {
        let factor = theta + j as f64 * alpha;
        if factor <= 0.0 {
            return Ok(LogProb::ZERO);
        }
        numer += factor.ln();
    }
    let denom = rising_factorial_log(theta + 1.0, n - 1, 1.0)?;
    let mut blocks = 0.0;
    for (i, count) in c.sizes() {
        let rising = rising_factorial_log(1.0 - alpha, i - 1, 1.0)?;
        blocks += count as f64 * (rising - ln_factorial(i));
    }
    Ok(LogProb::new(numer - denom + ln_arrangements(c) + blocks))
}

/// PSF over every class of `n`, keyed by frequency vector.
pub fn psf_table(n: usize, p: &PdParams) -> Result<Vec<(FrequencyVector, f64)>> {
    enumerate_shapes(n)
        .into_iter()
        .map(|f| {
            let lp = psf_log_prob(&f.to_class(), p)?;
            Ok((f, lp.prob()))
        })
        .collect()
}

/// Pushes the level-`n` Pitman law down one level by uniform box deletion
/// and returns the largest absolute deviation from the level-`n-1` law.
pub fn consistency_check(n: usize, p: &PdParams) -> Result<f64> {
    if n < 2 {
        return Err(Error::Config(format!("consistency check needs n >= 2, got {n}")));
    }
    let mut induced: HashMap<FrequencyVector, f64> = HashMap::new();
    for (shape, prob) in psf_table(n, p)? {
        for (smaller, w) in down_neighbors(&shape) {
            let w = *w.numer() as f64 / *w.denom() as f64;
            *induced.entry(smaller).or_insert(0.0) += w * prob;
        }
    }
    let mut worst: f64 = 0.0;
    for (shape, prob) in psf_table(n - 1, p)? {
        let got = induced.get(&shape).copied().unwrap_or(0.0);
        worst = worst.max((got - prob).abs());
    }
    Ok(worst)
}
