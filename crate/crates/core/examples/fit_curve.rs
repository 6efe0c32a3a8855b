//! Fit (alpha, theta) to a capital distribution curve.
//!
//! With no argument the observed curve is an averaged PD(0.6, 55) curve;
//! otherwise the argument is a `ticker,cap` CSV file.
//!
//!     cargo run --release --example fit_curve [caps.csv]

use std::fs::File;
use std::time::Instant;

use pdmarket::fitting::{average_pd_curve, fit_params, ingest_caps, CapsFormat, SearchConfig};
use pdmarket::{PdParams, RngSeed};

fn main() -> pdmarket::Result<()> {
    let observed = match std::env::args().nth(1) {
        Some(path) => {
            let caps = ingest_caps(File::open(path)?, CapsFormat::default())?;
            for w in &caps.warnings {
                eprintln!("warning: {w}");
            }
            caps.curve.truncated(500)
        }
        None => average_pd_curve(&PdParams::new(0.6, 55.0)?, 500, 500, RngSeed(11))?,
    };

    let start = Instant::now();
    let fit = fit_params(&observed, &SearchConfig::default(), RngSeed(0))?;
    println!("{}", fit.to_json());
    println!(
        "{} curve evaluations in {:.1}s",
        fit.grid_trace.len(),
        start.elapsed().as_secs_f64()
    );
    for rank in [1, 2, 5, 10, 50, 100, 500] {
        if let (Some(o), Some(f)) = (observed.weights.get(rank - 1), fit.fitted.weights.get(rank - 1)) {
            println!("rank {rank:>4}  observed {o:.3e}  fitted {f:.3e}");
        }
    }
    Ok(())
}
