//! Down-up Markov chain on partition shapes of fixed size `n`.
//!
//! Each step deletes one box chosen uniformly (down) and then seats one
//! customer by the Chinese restaurant process (up). The Pitman sampling
//! formula at level `n` is stationary for this chain.

use rand::Rng;

use crate::error::{Error, Result};
use crate::params::PdParams;
use crate::partition::{BlockMultiset, FrequencyVector};
use crate::samplers::{crp_seat, sample_crp_state, RngSeed};

/// Removes one box chosen uniformly among all `n` boxes: a block of size
/// `n_i` loses a box with probability `c_i n_i / n` summed over its size class.
pub fn down_move<R: Rng + ?Sized>(state: &mut BlockMultiset, rng: &mut R) -> Result<()> {
    if state.n() == 0 {
        return Err(Error::State(
            "cannot delete a box from the empty partition".into(),
        ));
    }
    let mut u = rng.random_range(0..state.n());
    let mut chosen = None;
    for (size, count) in state.counts().rev() {
        let boxes = size * count;
        if u < boxes {
            chosen = Some(size);
            break;
        }
        u -= boxes;
    }
    state.shrink_block(chosen.expect("box index within n"));
    Ok(())
}

pub fn down_step<R: Rng + ?Sized>(f: &FrequencyVector, rng: &mut R) -> Result<FrequencyVector> {
    let mut state = BlockMultiset::from(f);
    down_move(&mut state, rng)?;
    Ok(state.to_freq())
}

pub fn up_step<R: Rng + ?Sized>(f: &FrequencyVector, p: &PdParams, rng: &mut R) -> FrequencyVector {
    let mut state = BlockMultiset::from(f);
    crp_seat(&mut state, p, rng);
    state.to_freq()
}

/// Parameters of one chain run.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub n: usize,
    pub params: PdParams,
    pub steps: usize,
    /// Number of largest weights recorded per row.
    pub record_top: usize,
    /// Record every `thin`-th step.
    pub thin: usize,
    pub seed: RngSeed,
}

impl ChainConfig {
    /// Defaults: top five weights, thinning of one sweep (`thin = n`), seed 0.
    pub fn new(n: usize, params: PdParams, steps: usize) -> Self {
        Self {
            n,
            params,
            steps,
            record_top: 5,
            thin: n.max(1),
            seed: RngSeed(0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("chain size n must be >= 1".into()));
        }
        if self.record_top == 0 {
            return Err(Error::Config("record_top must be >= 1".into()));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be >= 1".into()));
        }
        Ok(())
    }
}

/// Starting point of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum ChainInit {
    /// Draw the initial shape from the CRP, i.e. from the stationary law.
    Stationary,
    Shape(FrequencyVector),
}

/// Recorded top weights `x_(i) = n_i / n`, one row per recorded step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<usize>,
    pub series: Vec<Vec<f64>>,
    pub record_top: usize,
}

impl Trajectory {
    /// CSV with columns `step,x1,...,xk`; rows with fewer blocks are zero-padded.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["step".to_string()];
        header.extend((1..=self.record_top).map(|i| format!("x{i}")));
        w.write_record(&header)?;
        for (t, row) in self.times.iter().zip(&self.series) {
            let mut rec = vec![t.to_string()];
            rec.extend((0..self.record_top).map(|i| row.get(i).copied().unwrap_or(0.0).to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the chain, calling `observe(step, state)` at step 0 and then after
/// every `thin`-th down-up pair.
pub fn run_chain_with<F>(cfg: &ChainConfig, init: &ChainInit, mut observe: F) -> Result<BlockMultiset>
where
    F: FnMut(usize, &BlockMultiset),
{
    cfg.validate()?;
    let mut rng = cfg.seed.rng();
    let mut state = match init {
        ChainInit::Stationary => sample_crp_state(cfg.n, &cfg.params, &mut rng),
        ChainInit::Shape(f) => {
            if f.n() != cfg.n {
                return Err(Error::Config(format!(
                    "initial shape has n = {}, chain expects n = {}",
                    f.n(),
                    cfg.n
                )));
            }
            BlockMultiset::from(f)
        }
    };
    observe(0, &state);
    for step in 1..=cfg.steps {
        down_move(&mut state, &mut rng)?;
        crp_seat(&mut state, &cfg.params, &mut rng);
        debug_assert_eq!(state.n(), cfg.n);
        if step % cfg.thin == 0 {
            observe(step, &state);
        }
    }
    Ok(state)
}

pub fn run_chain(cfg: &ChainConfig, init: &ChainInit) -> Result<Trajectory> {
    let mut traj = Trajectory {
        times: Vec::new(),
        series: Vec::new(),
        record_top: cfg.record_top,
    };
    let n = cfg.n as f64;
    run_chain_with(cfg, init, |step, state| {
        traj.times.push(step);
        traj.series.push(
            state
                .largest(cfg.record_top)
                .into_iter()
                .map(|b| b as f64 / n)
                .collect(),
        );
    })?;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(b: &[usize]) -> FrequencyVector {
        FrequencyVector::new(b.to_vec()).unwrap()
    }

    #[test]
    fn trivial_moves() {
        let mut rng = RngSeed(0).rng();
        assert!(down_step(&fv(&[1]), &mut rng).unwrap().is_empty());
        assert!(matches!(down_step(&fv(&[]), &mut rng), Err(Error::State(_))));
        for _ in 0..20 {
            assert_eq!(down_step(&fv(&[2, 2]), &mut rng).unwrap(), fv(&[2, 1]));
        }
        let p = PdParams::new(0.5, 1.0).unwrap();
        assert_eq!(up_step(&fv(&[]), &p, &mut rng), fv(&[1]));
    }

    #[test]
    fn down_frequencies_from_three_two() {
        let mut rng = RngSeed(1).rng();
        let trials = 200_000;
        let pairs = (0..trials)
            .filter(|_| down_step(&fv(&[3, 2]), &mut rng).unwrap() == fv(&[2, 2]))
            .count();
        let f = pairs as f64 / trials as f64;
        let sd = (0.6f64 * 0.4 / trials as f64).sqrt();
        assert!((f - 0.6).abs() < 4.0 * sd, "{f}");
    }

    #[test]
    fn up_frequencies_from_single_block() {
        let p = PdParams::new(0.5, 1.0).unwrap();
        let mut rng = RngSeed(2).rng();
        let trials = 200_000;
        let grow = (0..trials)
            .filter(|_| up_step(&fv(&[4]), &p, &mut rng) == fv(&[5]))
            .count();
        let (f, w) = (grow as f64 / trials as f64, 3.5 / 5.0);
        assert!((f - w).abs() < 4.0 * (w * (1.0 - w) / trials as f64).sqrt());
    }

    #[test]
    fn zero_steps_records_initial_state() {
        let p = PdParams::new(0.3, 5.0).unwrap();
        let cfg = ChainConfig::new(4, p, 0);
        let t = run_chain(&cfg, &ChainInit::Shape(fv(&[3, 1]))).unwrap();
        assert_eq!(t.times, vec![0]);
        assert_eq!(t.series, vec![vec![0.75, 0.25]]);
    }

    #[test]
    fn size_mismatch_and_bad_config() {
        let p = PdParams::new(0.3, 5.0).unwrap();
        let cfg = ChainConfig::new(5, p, 10);
        assert!(matches!(
            run_chain(&cfg, &ChainInit::Shape(fv(&[3, 1]))),
            Err(Error::Config(_))
        ));
        let mut bad = cfg.clone();
        bad.thin = 0;
        assert!(run_chain(&bad, &ChainInit::Stationary).is_err());
        bad = cfg;
        bad.record_top = 0;
        assert!(run_chain(&bad, &ChainInit::Stationary).is_err());
    }

    #[test]
    fn single_element_chain_passes_through_empty_state() {
        let p = PdParams::new(0.3, 5.0).unwrap();
        let mut cfg = ChainConfig::new(1, p, 10);
        cfg.thin = 1;
        let t = run_chain(&cfg, &ChainInit::Stationary).unwrap();
        assert_eq!(t.times.len(), 11);
        assert!(t.series.iter().all(|r| r == &[1.0]));
    }

    #[test]
    fn rows_are_descending_and_bounded() {
        let p = PdParams::new(0.3, 5.0).unwrap();
        let mut cfg = ChainConfig::new(300, p, 3000);
        cfg.thin = 30;
        cfg.seed = RngSeed(8);
        let t = run_chain(&cfg, &ChainInit::Stationary).unwrap();
        assert_eq!(t.times.len(), 101);
        for row in &t.series {
            assert!(row.windows(2).all(|w| w[0] >= w[1]));
            assert!(row.iter().all(|x| (0.0..=1.0).contains(x)));
            assert!(row.iter().sum::<f64>() <= 1.0 + 1e-12);
        }
        let again = run_chain(&cfg, &ChainInit::Stationary).unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn csv_export_pads_short_rows() {
        let t = Trajectory {
            times: vec![0, 5],
            series: vec![vec![0.5, 0.5], vec![1.0]],
            record_top: 2,
        };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "step,x1,x2\n0,0.5,0.5\n5,1,0\n");
    }
}
