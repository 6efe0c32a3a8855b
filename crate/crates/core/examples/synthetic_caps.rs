//! Writes a synthetic capitalization table generated from PD(0.6, 55).
//!
//! The averaged curve over 500 stick-breaking samples is scaled to a
//! 25 trillion market and its largest 20000 ranks written as
//! `ticker,market_cap`. This is how `data/synthetic_caps.csv` was produced.
//!
//!     cargo run --release --example synthetic_caps > data/synthetic_caps.csv

use std::io::stdout;

use pdmarket::fitting::average_pd_curve;
use pdmarket::{PdParams, RngSeed};

fn main() -> pdmarket::Result<()> {
    let curve = average_pd_curve(&PdParams::new(0.6, 55.0)?, 20_000, 500, RngSeed(2014))?;
    let mut w = csv::Writer::from_writer(stdout().lock());
    w.write_record(["ticker", "market_cap"])?;
    for (rank, x) in curve.ranks.iter().zip(&curve.weights) {
        w.write_record([format!("SYN{rank:05}"), format!("{:.0}", x * 25e12)])?;
    }
    w.flush()?;
    Ok(())
}
