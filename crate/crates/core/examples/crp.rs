//! Chinese restaurant process against the exact law.
//!
//!     cargo run --release --example crp

use std::collections::HashMap;

use pdmarket::laws::psf_table;
use pdmarket::samplers::sample_crp;
use pdmarket::{FrequencyVector, PdParams, RngSeed};

fn main() -> pdmarket::Result<()> {
    let p = PdParams::new(0.5, 1.0)?;
    let (n, draws) = (5, 200_000);
    let mut rng = RngSeed(1).rng();
    let mut counts: HashMap<FrequencyVector, usize> = HashMap::new();
    for _ in 0..draws {
        *counts.entry(sample_crp(n, &p, &mut rng)?).or_insert(0) += 1;
    }
    println!("{p}, n = {n}, {draws} restaurants");
    println!("{:<12} {:>10} {:>10}", "shape", "exact", "observed");
    for (shape, prob) in psf_table(n, &p)? {
        let seen = counts.get(&shape).copied().unwrap_or(0) as f64 / draws as f64;
        println!("{:<12} {prob:>10.5} {seen:>10.5}", shape.to_string());
    }

    let big = sample_crp(10_000, &p, &mut rng)?;
    println!(
        "10000 customers: {} tables, largest {:?}",
        big.k(),
        &big.blocks()[..5]
    );
    Ok(())
}
