use rand::Rng;

use super::weights::RankedWeights;
use crate::error::{Error, Result};

/// Expected ranked piece lengths of a unit stick cut at `n - 1` uniform
/// points: `x_k = (1/n) sum_{j=k}^{n} 1/j`.
pub fn broken_stick_expected(n: usize) -> Vec<f64> {
    let mut tail = 0.0;
    let mut out = vec![0.0; n];
    for k in (1..=n).rev() {
        tail += 1.0 / k as f64;
        out[k - 1] = tail / n as f64;
    }
    out
}

/// One ranked broken-stick sample: spacings of `n - 1` uniform points.
pub fn sample_broken_stick<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<RankedWeights> {
    if n == 0 {
        return Err(Error::Domain("broken stick needs n >= 1".into()));
    }
    let mut cuts: Vec<f64> = (0..n - 1).map(|_| rng.random::<f64>()).collect();
    cuts.sort_by(f64::total_cmp);
    let mut pieces = Vec::with_capacity(n);
    let mut last = 0.0;
    for c in cuts {
        pieces.push(c - last);
        last = c;
    }
    pieces.push(1.0 - last);
    Ok(RankedWeights::from_pieces(pieces, 0.0))
}
