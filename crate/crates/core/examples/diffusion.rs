//! Wright-Fisher stick diffusion with a Gamma market value and restored prices.
//!
//!     cargo run --release --example diffusion

use pdmarket::diffusion::{simulate, Diffusion, DiffusionConfig};
use pdmarket::{PdParams, RngSeed};

fn main() -> pdmarket::Result<()> {
    let (alpha, theta) = (0.6, 55.0);
    let mut cfg = DiffusionConfig::new(PdParams::new(alpha, theta)?, 5, 1e-4, 200.0, 2.0);
    cfg.seed = RngSeed(8);
    println!("largest stable dt: {:.4}", cfg.max_dt());

    let mut sim = Diffusion::new(cfg.clone())?;
    let steps = cfg.total_steps();
    let mut sums = vec![0.0; cfg.n_sticks + 1];
    for _ in 0..steps {
        sim.step();
        let s = sim.state();
        for (acc, v) in sums.iter_mut().zip(s.z.iter().chain([&s.m])) {
            *acc += v;
        }
    }
    for n in 1..=cfg.n_sticks {
        let want = (1.0 - alpha) / (1.0 - alpha + theta + n as f64 * alpha);
        println!(
            "Z_{n}: time average {:.5}, stationary mean {want:.5}",
            sums[n - 1] / steps as f64
        );
    }
    println!(
        "M: time average {:.4}, stationary mean {}",
        sums[cfg.n_sticks] / steps as f64,
        cfg.m0
    );

    let mut short = cfg;
    short.t_end = 0.01;
    short.record_every = 20;
    let mut out = Vec::new();
    simulate(&short)?.write_csv(&mut out)?;
    print!("{}", String::from_utf8_lossy(&out));
    Ok(())
}
