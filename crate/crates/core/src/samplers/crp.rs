use rand::Rng;

use crate::error::{Error, Result};
use crate::params::PdParams;
use crate::partition::{BlockMultiset, FrequencyVector, Seat};

/// Seats one more customer into `state` according to the two-parameter
/// Chinese restaurant process and returns where they went.
pub fn crp_seat<R: Rng + ?Sized>(state: &mut BlockMultiset, p: &PdParams, rng: &mut R) -> Seat {
    let seat = choose_seat(state, p, rng);
    state.seat(seat);
    seat
}

fn choose_seat<R: Rng + ?Sized>(state: &BlockMultiset, p: &PdParams, rng: &mut R) -> Seat {
    if state.n() == 0 {
        return Seat::New;
    }
    let (alpha, theta) = (p.alpha(), p.theta());
    let new_weight = (theta + alpha * state.k() as f64).max(0.0);
    // unnormalised weights; the common factor 1/(n + theta) cancels
    let total = state.n() as f64 - alpha * state.k() as f64 + new_weight;
    let mut u = rng.random::<f64>() * total;
    if u < new_weight {
        return Seat::New;
    }
    u -= new_weight;
    let mut fallback = Seat::New;
    for (size, count) in state.counts().rev() {
        let w = count as f64 * (size as f64 - alpha);
        if u < w {
            return Seat::Existing(size);
        }
        u -= w;
        fallback = Seat::Existing(size);
    }
    fallback
}

/// Shape of the partition after seating `n` customers.
pub fn sample_crp<R: Rng + ?Sized>(n: usize, p: &PdParams, rng: &mut R) -> Result<FrequencyVector> {
    if n == 0 {
        return Err(Error::Domain("CRP needs n >= 1 customers".into()));
    }
    Ok(sample_crp_state(n, p, rng).to_freq())
}

pub(crate) fn sample_crp_state<R: Rng + ?Sized>(n: usize, p: &PdParams, rng: &mut R) -> BlockMultiset {
    let mut state = BlockMultiset::new();
    for _ in 0..n {
        crp_seat(&mut state, p, rng);
    }
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::RngSeed;

    #[test]
    fn first_customer_opens_a_table() {
        let p = PdParams::new(0.5, 0.0).unwrap();
        let mut rng = RngSeed(0).rng();
        assert_eq!(sample_crp(1, &p, &mut rng).unwrap().blocks(), &[1]);
        assert!(sample_crp(0, &p, &mut rng).is_err());
    }

    #[test]
    fn finite_regime_never_exceeds_m_tables() {
        let p = PdParams::finite(-1.0, 3).unwrap();
        let mut rng = RngSeed(1).rng();
        for _ in 0..200 {
            let f = sample_crp(30, &p, &mut rng).unwrap();
            assert!(f.k() <= 3);
            assert_eq!(f.n(), 30);
        }
    }

    #[test]
    fn seating_frequencies_from_fixed_state() {
        // from [2,1,1]: grow the pair, grow a singleton, or open a table
        let (alpha, theta) = (0.5, 1.0);
        let p = PdParams::new(alpha, theta).unwrap();
        let start = BlockMultiset::from(&FrequencyVector::new(vec![2, 1, 1]).unwrap());
        let mut rng = RngSeed(2).rng();
        let trials = 200_000;
        let mut counts = [0usize; 3];
        for _ in 0..trials {
            match choose_seat(&start, &p, &mut rng) {
                Seat::Existing(2) => counts[0] += 1,
                Seat::Existing(1) => counts[1] += 1,
                Seat::New => counts[2] += 1,
                other => panic!("unexpected {other:?}"),
            }
        }
        let want = [
            (2.0 - alpha) / (theta + 4.0),
            2.0 * (1.0 - alpha) / (theta + 4.0),
            (theta + 3.0 * alpha) / (theta + 4.0),
        ];
        for (c, w) in counts.iter().zip(want) {
            let f = *c as f64 / trials as f64;
            let sd = (w * (1.0 - w) / trials as f64).sqrt();
            assert!((f - w).abs() < 4.0 * sd, "{f} vs {w}");
        }
    }
}
