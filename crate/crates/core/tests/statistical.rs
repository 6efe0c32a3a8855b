mod common;

use std::collections::HashMap;

use pdmarket::chain::{down_step, up_step};
use pdmarket::diffusion::{simulate, wf_step, DiffusionConfig};
use pdmarket::fitting::{average_pd_curve, fit_params, SearchConfig, WeightCurve};
use pdmarket::partition::{down_neighbors, up_neighbors};
use pdmarket::samplers::{
    break_sticks, broken_stick_expected, par_ensemble, sample_symmetric_dirichlet, RngSeed, TruncationRule,
};
use pdmarket::{FrequencyVector, PdParams};
use rand_distr::{Distribution, StandardNormal};

use common::{beta_moments, correlation, ks_statistic, mean_var};

#[test]
fn down_up_step_matches_composed_kernel() {
    let p = PdParams::new(0.5, 1.0).unwrap();
    let start = FrequencyVector::new(vec![3, 1, 1]).unwrap();
    let mut exact: HashMap<FrequencyVector, f64> = HashMap::new();
    for (mid, wd) in down_neighbors(&start) {
        let wd = *wd.numer() as f64 / *wd.denom() as f64;
        for (end, wu) in up_neighbors(&mid, &p) {
            *exact.entry(end).or_insert(0.0) += wd * wu;
        }
    }
    let trials = 400_000;
    let mut rng = RngSeed(21).rng();
    let mut counts: HashMap<FrequencyVector, usize> = HashMap::new();
    for _ in 0..trials {
        let mid = down_step(&start, &mut rng).unwrap();
        *counts.entry(up_step(&mid, &p, &mut rng)).or_insert(0) += 1;
    }
    assert!(counts.keys().all(|k| exact.contains_key(k)));
    for (shape, prob) in &exact {
        let got = counts.get(shape).copied().unwrap_or(0) as f64 / trials as f64;
        let sd = (prob * (1.0 - prob) / trials as f64).sqrt();
        assert!((got - prob).abs() < 4.0 * sd, "{shape}: {got} vs {prob}");
    }
}

#[test]
fn broken_stick_five_pieces() {
    let want = [0.46, 0.26, 0.16, 0.09, 0.04];
    let got = broken_stick_expected(5);
    for (w, g) in want.iter().zip(&got) {
        assert!((w - g).abs() <= 0.01, "{got:?}");
    }
    assert!((got.iter().sum::<f64>() - 1.0).abs() < 1e-15);
}

#[test]
fn finite_regime_sticks_match_ranked_dirichlet() {
    let (kappa, m) = (0.5, 4);
    let p = PdParams::finite(-kappa, m).unwrap();
    let n = 40_000;
    let sticks = par_ensemble(RngSeed(31), n, |_, rng| {
        break_sticks(&p, TruncationRule::Fixed(m), rng).unwrap().ranked()
    });
    let dirichlet = par_ensemble(RngSeed(32), n, |_, rng| {
        sample_symmetric_dirichlet(m, kappa, rng).unwrap()
    });
    for rank in 0..m {
        let a: Vec<f64> = sticks.iter().map(|w| w.weights()[rank]).collect();
        let b: Vec<f64> = dirichlet.iter().map(|w| w.weights()[rank]).collect();
        let d = ks_statistic(&a, &b);
        assert!(d < 1.95 * (2.0 / n as f64).sqrt(), "rank {}: KS {d}", rank + 1);
    }
}

/// Long-run average of the clamped Euler scheme for one stick, after `burn_in` steps.
fn clamped_mean(a: f64, b: f64, dt: f64, horizon: f64, burn_in: usize, seed: u64) -> f64 {
    let mut rng = RngSeed(seed).rng();
    let mut z = a / (a + b);
    let steps = (horizon / dt) as usize;
    let mut sum = 0.0;
    for i in 0..burn_in + steps {
        let noise: f64 = StandardNormal.sample(&mut rng);
        z = wf_step(z, a, b, dt, noise);
        if i >= burn_in {
            sum += z;
        }
    }
    sum / steps as f64
}

#[test]
fn clamped_stick_long_run_mean() {
    // stick 1 of PD(0.1, 2.9): a = 1 - alpha, b = theta + alpha; 10^6 steps
    let (a, b) = (0.9, 3.0);
    let got = clamped_mean(a, b, 0.01, 10_000.0, 100_000, 0);
    let want = a / (a + b);
    assert!((got / want - 1.0).abs() < 0.02, "{got} vs {want}");
}

#[test]
fn clamped_stick_bias_shrinks_with_dt() {
    let (a, b) = (0.5, 10.5);
    let want = a / (a + b);
    let errors: Vec<f64> = [0.04, 0.01, 0.0025]
        .iter()
        .map(|&dt| (clamped_mean(a, b, dt, 2000.0, 0, 42) / want - 1.0).abs())
        .collect();
    assert!(errors.windows(2).all(|e| e[1] < e[0]), "{errors:?}");
}

#[test]
fn market_is_uncorrelated_with_weights() {
    let p = PdParams::new(0.6, 55.0).unwrap();
    let mut cfg = DiffusionConfig::new(p, 3, 1e-3, 200.0, 1.0);
    cfg.record_every = 10;
    cfg.seed = RngSeed(43);
    let paths = simulate(&cfg).unwrap();
    let x1: Vec<f64> = paths.weights.iter().map(|x| x[0]).collect();
    let r = correlation(&x1, &paths.market);
    assert!(r.abs() < 0.05, "corr(X1, M) = {r}");
    let (m, _) = mean_var(&paths.market);
    assert!((m - 1.0).abs() < 0.02, "{m}");
}

#[test]
fn simulated_stick_variance_settles_with_dt() {
    let (alpha, theta) = (0.5, 10.0);
    let (_, v_true) = beta_moments(1.0 - alpha, theta + alpha);
    let errors: Vec<f64> = [0.04, 0.01, 0.0025]
        .iter()
        .map(|&dt| {
            let mut cfg = DiffusionConfig::new(PdParams::new(alpha, theta).unwrap(), 1, dt, 3000.0, 1.0);
            cfg.record_every = 1;
            cfg.seed = RngSeed(44);
            let z: Vec<f64> = simulate(&cfg).unwrap().weights.iter().map(|x| x[0]).collect();
            (mean_var(&z).1 / v_true - 1.0).abs()
        })
        .collect();
    assert!(errors[0] > errors[2] && errors[2] < 0.03, "{errors:?}");
}

#[test]
fn averaged_curve_is_concave_beyond_rank_ten() {
    let p = PdParams::new(0.6, 55.0).unwrap();
    let c = average_pd_curve(&p, 500, 200, RngSeed(45)).unwrap();
    // adjacent ranks differ by less than the sampling noise, so use ranks spaced by sqrt(2)
    let mut ranks = vec![10.0f64];
    while ranks.last().unwrap() * 2f64.sqrt() <= 500.0 {
        ranks.push(ranks.last().unwrap() * 2f64.sqrt());
    }
    let pts: Vec<(f64, f64)> = ranks
        .iter()
        .map(|r| {
            let r = r.round() as usize;
            ((r as f64).ln(), c.weights[r - 1].ln())
        })
        .collect();
    let second: Vec<f64> = pts
        .windows(3)
        .map(|w| {
            let s1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            let s2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
            s2 - s1
        })
        .collect();
    let concave = second.iter().filter(|d| **d <= 0.0).count() as f64 / second.len() as f64;
    assert!(concave >= 0.9, "concave fraction {concave}");
}

fn small_search() -> SearchConfig {
    SearchConfig {
        alpha_grid: vec![0.2, 0.4, 0.6],
        theta_grid: vec![5.0, 20.0, 60.0],
        refine_rounds: 2,
        n_samples: 30,
        common_random_numbers: true,
    }
}

#[test]
fn fit_is_deterministic_and_label_blind() {
    let observed = average_pd_curve(&PdParams::new(0.44, 18.0).unwrap(), 40, 100, RngSeed(46)).unwrap();
    let a = fit_params(&observed, &small_search(), RngSeed(1)).unwrap();
    let b = fit_params(&observed, &small_search(), RngSeed(1)).unwrap();
    assert_eq!(a, b);
    let relabelled = WeightCurve {
        label: "another exchange, 2014".into(),
        ..observed.clone()
    };
    let c = fit_params(&relabelled, &small_search(), RngSeed(1)).unwrap();
    assert_eq!(
        (a.params, a.loss, &a.grid_trace),
        (c.params, c.loss, &c.grid_trace)
    );
    assert!(a.grid_trace.len() >= 9);
    assert!(a.grid_trace.iter().all(|(_, _, l)| *l >= a.loss));
    assert_eq!(a.n_ranks_used, 40);
}

#[test]
fn fit_without_common_numbers_is_still_reproducible() {
    let observed = average_pd_curve(&PdParams::new(0.3, 10.0).unwrap(), 30, 100, RngSeed(47)).unwrap();
    let search = SearchConfig {
        common_random_numbers: false,
        ..small_search()
    };
    let a = fit_params(&observed, &search, RngSeed(2)).unwrap();
    assert_eq!(a, fit_params(&observed, &search, RngSeed(2)).unwrap());
}
