//! Expected ranked pieces of a randomly broken stick.
//!
//!     cargo run --release --example broken_stick

use pdmarket::samplers::{broken_stick_expected, par_ensemble, sample_broken_stick};
use pdmarket::RngSeed;

fn main() -> pdmarket::Result<()> {
    for n in [3, 5, 10] {
        let expected = broken_stick_expected(n);
        let draws = par_ensemble(RngSeed(n as u64), 100_000, |_, rng| {
            sample_broken_stick(n, rng).unwrap()
        });
        let mc: Vec<f64> = (0..n)
            .map(|r| draws.iter().map(|d| d.weights()[r]).sum::<f64>() / draws.len() as f64)
            .collect();
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
        println!("n = {n:>2}  expected {}", fmt(&expected));
        println!("        simulated {}", fmt(&mc));
    }
    Ok(())
}
