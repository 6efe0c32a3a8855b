//! Down-up Markov chain: stationarity at small n and a trajectory at large n.
//!
//!     cargo run --release --example down_up_chain

use std::collections::HashMap;

use pdmarket::chain::{run_chain, run_chain_with, ChainConfig, ChainInit};
use pdmarket::laws::psf_table;
use pdmarket::{FrequencyVector, PdParams, RngSeed};

fn main() -> pdmarket::Result<()> {
    let p = PdParams::new(0.5, 1.0)?;
    let mut cfg = ChainConfig::new(6, p, 300_000);
    cfg.thin = 30;
    let mut counts: HashMap<FrequencyVector, usize> = HashMap::new();
    let mut records = 0;
    let start = FrequencyVector::new(vec![6])?;
    run_chain_with(&cfg, &ChainInit::Shape(start), |step, state| {
        if step > 0 {
            *counts.entry(state.to_freq()).or_insert(0) += 1;
            records += 1;
        }
    })?;
    println!("{p}, n = 6, started from a single block");
    for (shape, prob) in psf_table(6, &p)? {
        let seen = counts.get(&shape).copied().unwrap_or(0) as f64 / records as f64;
        println!("{:<14} exact {prob:.4}  chain {seen:.4}", shape.to_string());
    }

    let mut big = ChainConfig::new(1000, PdParams::new(0.6, 55.0)?, 20_000);
    big.thin = 5000;
    big.seed = RngSeed(7);
    let traj = run_chain(&big, &ChainInit::Stationary)?;
    let mut out = Vec::new();
    traj.write_csv(&mut out)?;
    print!("{}", String::from_utf8_lossy(&out));
    Ok(())
}
