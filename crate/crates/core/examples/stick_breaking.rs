//! Size-biased stick-breaking and the gamma-normalised Dirichlet.
//!
//!     cargo run --release --example stick_breaking

use pdmarket::samplers::{
    break_sticks, par_ensemble, sample_gamma_dirichlet, sample_sticks_size_biased, TruncationRule,
};
use pdmarket::{PdParams, RngSeed};

fn main() -> pdmarket::Result<()> {
    let p = PdParams::new(0.6, 55.0)?;
    let mut rng = RngSeed(3).rng();
    let sticks = break_sticks(&p, TruncationRule::default(), &mut rng)?;
    println!(
        "{p}: {} sticks broken, unbroken remainder {:.2e}",
        sticks.pieces.len(),
        sticks.residual
    );
    let first: Vec<String> = sticks.pieces[..5].iter().map(|x| format!("{x:.4}")).collect();
    println!("first pieces in size-biased order: {}", first.join(" "));
    let ranked = sticks.ranked();
    let top: Vec<String> = ranked.weights()[..5].iter().map(|x| format!("{x:.4}")).collect();
    println!("largest five weights: {}", top.join(" "));

    // alpha < 0: the m-th stick takes what is left
    let finite = PdParams::finite(-0.5, 4)?;
    let w = sample_sticks_size_biased(&finite, TruncationRule::default(), &mut rng)?;
    println!("{finite}: {:?}", w.weights());

    // ranked Dir_4(0.5) has the same law; the gamma total is independent of the weights
    let draws = par_ensemble(RngSeed(4), 20_000, |_, rng| {
        sample_gamma_dirichlet(4, 0.5, rng).unwrap()
    });
    let mean_top = draws.iter().map(|d| d.ranked().top()).sum::<f64>() / draws.len() as f64;
    let mean_total = draws.iter().map(|d| d.total).sum::<f64>() / draws.len() as f64;
    println!(
        "ranked Dir_4(0.5): mean largest weight {mean_top:.4}, mean gamma total {mean_total:.4} (expect 2)"
    );
    Ok(())
}
