//! Ranked jumps of the tempered stable subordinator as a PD(alpha, theta) sampler.
//!
//!     cargo run --release --example subordinator

use pdmarket::samplers::{break_sticks, par_ensemble, TemperedStableSubordinator, TruncationRule};
use pdmarket::{PdParams, RngSeed};

fn main() -> pdmarket::Result<()> {
    let p = PdParams::new(0.5, 2.0)?;
    let sub = TemperedStableSubordinator::new(&p)?;
    let draws = 20_000;
    let samples = par_ensemble(RngSeed(5), draws, |_, rng| sub.sample(100, rng).unwrap());
    let totals: Vec<f64> = samples.iter().map(|s| s.total).collect();
    let mean = totals.iter().sum::<f64>() / draws as f64;
    let var = totals.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
    println!("{p}: jump total mean {mean:.3}, variance {var:.3} (both should be near theta = 2)");

    let trunc = TruncationRule::Residual {
        eps: 1e-3,
        max_sticks: 100_000,
    };
    let sticks = par_ensemble(RngSeed(6), draws, |_, rng| {
        break_sticks(&p, trunc, rng).unwrap().ranked()
    });
    for rank in 0..3 {
        let a = samples.iter().map(|s| s.weights.weights()[rank]).sum::<f64>() / draws as f64;
        let b = sticks.iter().map(|s| s.weights()[rank]).sum::<f64>() / draws as f64;
        println!(
            "mean weight at rank {}: subordinator {a:.4}, stick-breaking {b:.4}",
            rank + 1
        );
    }

    let tail = sub.tail();
    for x in [1e-6, 1e-3, 0.1, 1.0, 5.0] {
        println!("Levy tail N({x:e}) = {:.6e}", tail.tail(x));
    }
    Ok(())
}
