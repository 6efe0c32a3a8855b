//! Exact Pitman and Ewens sampling formulas for small n.
//!
//!     cargo run --example exact_laws -- 5 0.5 1

use pdmarket::laws::{consistency_check, esf_log_prob, psf_log_prob};
use pdmarket::partition::{enumerate_shapes, multiplicity};
use pdmarket::PdParams;

fn main() -> pdmarket::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(5), |s| s.parse()).expect("n");
    let alpha: f64 = args.get(1).map_or(Ok(0.5), |s| s.parse()).expect("alpha");
    let theta: f64 = args.get(2).map_or(Ok(1.0), |s| s.parse()).expect("theta");
    let p = PdParams::new(alpha, theta)?;

    println!("{:<16} {:>12} {:>14}", "shape", "partitions", "probability");
    let mut total = 0.0;
    for f in enumerate_shapes(n) {
        let c = f.to_class();
        let prob = psf_log_prob(&c, &p)?.prob();
        total += prob;
        println!("{:<16} {:>12} {:>14.10}", f.to_string(), multiplicity(&c), prob);
    }
    println!("sum = {total:.12}");

    if n >= 2 {
        println!(
            "consistency with level {}: {:.2e}",
            n - 1,
            consistency_check(n, &p)?
        );
    }
    if theta > 0.0 {
        let ewens = PdParams::new(0.0, theta)?;
        let worst = enumerate_shapes(n)
            .iter()
            .map(|f| {
                let c = f.to_class();
                (psf_log_prob(&c, &ewens).unwrap().prob() - esf_log_prob(&c, theta).unwrap().prob()).abs()
            })
            .fold(0.0, f64::max);
        println!("Pitman at alpha = 0 against Ewens: {worst:.2e}");
    }

    let finite = PdParams::finite(-0.5, 2)?;
    let cut: f64 = enumerate_shapes(n)
        .iter()
        .filter(|f| f.k() > 2)
        .map(|f| psf_log_prob(&f.to_class(), &finite).unwrap().prob())
        .sum();
    println!("{finite}: mass on shapes with more than 2 blocks = {cut}");
    Ok(())
}
