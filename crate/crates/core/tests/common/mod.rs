#![allow(dead_code)]

use std::collections::HashMap;

use pdmarket::FrequencyVector;

/// Sample mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, vx) = mean_var(xs);
    let (my, vy) = mean_var(ys);
    let cov = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (xs.len() as f64 - 1.0);
    cov / (vx * vy).sqrt()
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Largest binomial z-score of observed class counts against exact probabilities.
pub fn worst_class_z(
    counts: &HashMap<FrequencyVector, usize>,
    law: &[(FrequencyVector, f64)],
    trials: usize,
) -> f64 {
    let n = trials as f64;
    let mut worst: f64 = 0.0;
    for (shape, p) in law {
        let got = counts.get(shape).copied().unwrap_or(0) as f64 / n;
        let sd = (p * (1.0 - p) / n).sqrt();
        worst = worst.max((got - p).abs() / sd);
    }
    let unknown = counts
        .keys()
        .filter(|k| !law.iter().any(|(s, _)| s == *k))
        .count();
    if unknown > 0 {
        f64::INFINITY
    } else {
        worst
    }
}

/// Bell numbers `B_0..=B_n` from the Bell triangle.
pub fn bell_numbers(n: usize) -> Vec<u128> {
    let mut bells = vec![1u128];
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for &x in &row {
            let last = *next.last().unwrap();
            next.push(last + x);
        }
        bells.push(next[0]);
        row = next;
    }
    bells
}

/// Stick law moments `Beta(a, b)`: mean and variance.
pub fn beta_moments(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (a / s, a * b / (s * s * (s + 1.0)))
}
