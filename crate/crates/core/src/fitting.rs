//! Capital distribution curves: averaged model curves, log-log least
//! squares, and the `(alpha, theta)` search.

use std::collections::HashMap;
use std::io::Read;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::PdParams;
use crate::samplers::{break_sticks, par_ensemble, RngSeed, TruncationRule};

/// Ranked weights with explicit 1-based ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightCurve {
    pub ranks: Vec<usize>,
    pub weights: Vec<f64>,
    pub label: String,
}

impl WeightCurve {
    /// Curve with ranks `1..=weights.len()`.
    pub fn from_weights(weights: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let curve = Self {
            ranks: (1..=weights.len()).collect(),
            weights,
            label: label.into(),
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ranks.len() != self.weights.len() {
            return Err(Error::Data("ranks and weights differ in length".into()));
        }
        if self.ranks.first() == Some(&0) || self.ranks.windows(2).any(|r| r[0] >= r[1]) {
            return Err(Error::Data(
                "ranks must be positive and strictly ascending".into(),
            ));
        }
        if self.weights.iter().any(|w| !(*w > 0.0 && *w <= 1.0)) {
            return Err(Error::Data("curve weights must lie in (0, 1]".into()));
        }
        if self.weights.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Data("curve weights must be descending".into()));
        }
        if self.weights.iter().sum::<f64>() > 1.0 + 1e-9 {
            return Err(Error::Data("curve weights sum above one".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Keeps the first `n` ranks.
    pub fn truncated(&self, n: usize) -> WeightCurve {
        let n = n.min(self.len());
        WeightCurve {
            ranks: self.ranks[..n].to_vec(),
            weights: self.weights[..n].to_vec(),
            label: self.label.clone(),
        }
    }

    fn weight_at(&self, rank: usize) -> Option<f64> {
        self.ranks.binary_search(&rank).ok().map(|i| self.weights[i])
    }
}

/// Stick budget used for model curves: ten sticks per requested rank, at least 1000.
pub fn default_curve_truncation(n_ranks: usize) -> TruncationRule {
    TruncationRule::Residual {
        eps: 1e-8,
        max_sticks: (10 * n_ranks).max(1000),
    }
}

/// Rank-wise sums of the `n_ranks` largest pieces over `n_samples` draws;
/// returns the mean curve (zeros where no sample reaches that rank).
fn mean_ranked(
    p: &PdParams,
    n_ranks: usize,
    n_samples: usize,
    seed: RngSeed,
    trunc: TruncationRule,
) -> Result<Vec<f64>> {
    let per_sample = par_ensemble(seed, n_samples, |_, rng| -> Result<Vec<f64>> {
        let mut pieces = break_sticks(p, trunc, rng)?.pieces;
        let top = n_ranks.min(pieces.len());
        if top < pieces.len() {
            pieces.select_nth_unstable_by(top, |a, b| b.total_cmp(a));
            pieces.truncate(top);
        }
        pieces.sort_by(|a, b| b.total_cmp(a));
        Ok(pieces)
    });
    let mut sums = vec![0.0; n_ranks];
    for sample in per_sample {
        for (s, x) in sums.iter_mut().zip(sample?) {
            *s += x;
        }
    }
    Ok(sums.into_iter().map(|s| s / n_samples as f64).collect())
}

fn check_curve_args(p: &PdParams, n_ranks: usize, n_samples: usize) -> Result<()> {
    if !p.is_infinite() {
        return Err(Error::Unsupported(format!(
            "model curves are built for 0 <= alpha < 1, got {p}"
        )));
    }
    if n_ranks == 0 || n_samples == 0 {
        return Err(Error::Config("n_ranks and n_samples must be >= 1".into()));
    }
    Ok(())
}

/// Averaged Poisson-Dirichlet curve: mean over `n_samples` stick-breaking
/// draws of the `i`-th largest weight, for ranks `1..=n_ranks`.
pub fn average_pd_curve(
    p: &PdParams,
    n_ranks: usize,
    n_samples: usize,
    seed: RngSeed,
) -> Result<WeightCurve> {
    average_pd_curve_with(p, n_ranks, n_samples, seed, default_curve_truncation(n_ranks))
}

pub fn average_pd_curve_with(
    p: &PdParams,
    n_ranks: usize,
    n_samples: usize,
    seed: RngSeed,
    trunc: TruncationRule,
) -> Result<WeightCurve> {
    check_curve_args(p, n_ranks, n_samples)?;
    let mean = mean_ranked(p, n_ranks, n_samples, seed, trunc)?;
    let usable = mean.iter().take_while(|w| **w > 0.0).count();
    if usable < n_ranks {
        return Err(Error::Data(format!(
            "rank coverage: requested {n_ranks} ranks but samples reach only rank {usable}"
        )));
    }
    WeightCurve::from_weights(mean, p.to_string())
}

/// Model curve cut at the deepest rank any sample reaches.
fn covered_curve(p: &PdParams, n_ranks: usize, n_samples: usize, seed: RngSeed) -> Result<WeightCurve> {
    check_curve_args(p, n_ranks, n_samples)?;
    let mut mean = mean_ranked(p, n_ranks, n_samples, seed, default_curve_truncation(n_ranks))?;
    let usable = mean.iter().take_while(|w| **w > 0.0).count();
    mean.truncate(usable);
    Ok(WeightCurve {
        ranks: (1..=usable).collect(),
        weights: mean,
        label: p.to_string(),
    })
}

/// Sum of squared log-weight residuals over the observed ranks the model covers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Loss {
    pub value: f64,
    pub ranks_used: usize,
    /// Observed ranks beyond the model curve.
    pub ranks_excluded: usize,
}

/// `sum_i (ln w_model(i) - ln w_obs(i))^2` on shared ranks.
pub fn loglog_loss(model: &WeightCurve, observed: &WeightCurve) -> Result<Loss> {
    for (name, c) in [("model", model), ("observed", observed)] {
        if let Some(w) = c.weights.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::Data(format!("{name} curve has non-positive weight {w}")));
        }
    }
    let mut loss = Loss {
        value: 0.0,
        ranks_used: 0,
        ranks_excluded: 0,
    };
    for (&rank, &w_obs) in observed.ranks.iter().zip(&observed.weights) {
        match model.weight_at(rank) {
            Some(w_model) => {
                loss.value += (w_model.ln() - w_obs.ln()).powi(2);
                loss.ranks_used += 1;
            }
            None => loss.ranks_excluded += 1,
        }
    }
    Ok(loss)
}

/// Grid and refinement settings for [`fit_params`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub alpha_grid: Vec<f64>,
    pub theta_grid: Vec<f64>,
    /// Pattern-search rounds; the step halves after each.
    pub refine_rounds: usize,
    /// Stick-breaking draws averaged per model curve.
    pub n_samples: usize,
    /// Use the same seed for every model curve of a fit.
    pub common_random_numbers: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            alpha_grid: (0..20).map(|i| i as f64 * 0.05).collect(),
            theta_grid: log_spaced(1.0, 500.0, 25),
            refine_rounds: 4,
            n_samples: 200,
            common_random_numbers: true,
        }
    }
}

/// `points` values from `lo` to `hi`, evenly spaced in log scale.
pub fn log_spaced(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: PdParams,
    pub loss: f64,
    pub n_ranks_used: usize,
    pub curve_samples: usize,
    /// Every `(alpha, theta, loss)` evaluated, in evaluation order.
    pub grid_trace: Vec<(f64, f64, f64)>,
    pub warnings: Vec<String>,
    /// Model curve at the optimum, covering the observed ranks.
    pub fitted: WeightCurve,
}

/// JSON view of a [`FitResult`].
#[derive(Debug, Clone, Serialize)]
pub struct FitReport<'a> {
    pub alpha: f64,
    pub theta: f64,
    pub loss: f64,
    pub n_ranks_used: usize,
    pub curve_samples: usize,
    pub warnings: &'a [String],
}

impl FitResult {
    pub fn report(&self) -> FitReport<'_> {
        FitReport {
            alpha: self.params.alpha(),
            theta: self.params.theta(),
            loss: self.loss,
            n_ranks_used: self.n_ranks_used,
            curve_samples: self.curve_samples,
            warnings: &self.warnings,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.report()).expect("plain struct serializes")
    }

    /// `rank,observed,fitted` rows over the observed ranks the model covers.
    pub fn write_curves_csv<W: std::io::Write>(&self, observed: &WeightCurve, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rank", "observed", "fitted"])?;
        for (&rank, &obs) in observed.ranks.iter().zip(&observed.weights) {
            if let Some(fit) = self.fitted.weight_at(rank) {
                w.write_record([rank.to_string(), obs.to_string(), fit.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

const ALPHA_MAX: f64 = 0.99;

struct Evaluator<'a> {
    observed: &'a WeightCurve,
    n_ranks: usize,
    search: &'a SearchConfig,
    seed: RngSeed,
    cache: HashMap<(u64, u64), Loss>,
    trace: Vec<(f64, f64, f64)>,
    calls: u64,
}

impl Evaluator<'_> {
    fn curve_seed(&self, call: u64) -> RngSeed {
        if self.search.common_random_numbers {
            self.seed
        } else {
            self.seed.derive(call)
        }
    }

    fn loss_for(&self, alpha: f64, theta: f64, seed: RngSeed) -> Result<Loss> {
        let p = PdParams::new(alpha, theta)?;
        let model = covered_curve(&p, self.n_ranks, self.search.n_samples, seed)?;
        loglog_loss(&model, self.observed)
    }

    /// Evaluates all points not yet cached; order of `points` fixes the trace.
    fn evaluate(&mut self, points: &[(f64, f64)]) -> Result<Vec<Loss>> {
        let fresh: Vec<(f64, f64, RngSeed)> = points
            .iter()
            .filter(|(a, t)| !self.cache.contains_key(&(a.to_bits(), t.to_bits())))
            .enumerate()
            .map(|(i, &(a, t))| (a, t, self.curve_seed(self.calls + i as u64)))
            .collect();
        let losses: Vec<Result<Loss>> = fresh
            .par_iter()
            .map(|&(a, t, seed)| self.loss_for(a, t, seed))
            .collect();
        self.calls += fresh.len() as u64;
        for ((a, t, _), loss) in fresh.iter().zip(losses) {
            let loss = loss?;
            self.trace.push((*a, *t, loss.value));
            self.cache.insert((a.to_bits(), t.to_bits()), loss);
        }
        Ok(points
            .iter()
            .map(|(a, t)| self.cache[&(a.to_bits(), t.to_bits())])
            .collect())
    }
}

/// Ordering used for the argmin: loss, then alpha, then theta.
fn better(a: (f64, f64, f64), b: (f64, f64, f64)) -> bool {
    a.2.total_cmp(&b.2)
        .then(a.0.total_cmp(&b.0))
        .then(a.1.total_cmp(&b.1))
        .is_lt()
}

/// Least-squares fit of `(alpha, theta)` to an observed curve on the log-log
/// scale: grid search followed by pattern search in `(alpha, ln theta)`.
pub fn fit_params(observed: &WeightCurve, search: &SearchConfig, seed: RngSeed) -> Result<FitResult> {
    observed.validate()?;
    if observed.len() < 10 {
        return Err(Error::Data(format!(
            "fitting needs at least 10 ranks, got {}",
            observed.len()
        )));
    }
    if search.alpha_grid.is_empty() || search.theta_grid.is_empty() || search.n_samples == 0 {
        return Err(Error::Config(
            "search grids and n_samples must be non-empty".into(),
        ));
    }
    if search.alpha_grid.iter().any(|a| !(0.0..1.0).contains(a))
        || search.theta_grid.iter().any(|t| !(*t > 0.0))
    {
        return Err(Error::Config(
            "alpha grid must lie in [0,1) and theta grid be positive".into(),
        ));
    }
    let mut warnings = Vec::new();
    let (first, last) = (observed.weights[0], observed.weights[observed.len() - 1]);
    if (first - last).abs() <= 1e-12 * first {
        warnings.push("observed curve is constant; the fit is not identifiable".to_string());
    }

    let mut eval = Evaluator {
        observed,
        n_ranks: *observed.ranks.last().expect("non-empty"),
        search,
        seed,
        cache: HashMap::new(),
        trace: Vec::new(),
        calls: 0,
    };

    let grid: Vec<(f64, f64)> = search
        .alpha_grid
        .iter()
        .flat_map(|&a| search.theta_grid.iter().map(move |&t| (a, t)))
        .collect();
    let losses = eval.evaluate(&grid)?;
    let mut best = (grid[0].0, grid[0].1, losses[0].value);
    for (&(a, t), l) in grid.iter().zip(&losses) {
        if better((a, t, l.value), best) {
            best = (a, t, l.value);
        }
    }

    let mut step_alpha = grid_step(&search.alpha_grid, 0.05, |x| x);
    let mut step_log_theta = grid_step(&search.theta_grid, 0.25, f64::ln);
    for _ in 0..search.refine_rounds {
        step_alpha *= 0.5;
        step_log_theta *= 0.5;
        // keep polling at this step while the centre moves
        for _ in 0..8 {
            let mut polls = Vec::with_capacity(8);
            for da in [-1.0, 0.0, 1.0] {
                for dt in [-1.0, 0.0, 1.0] {
                    if da == 0.0 && dt == 0.0 {
                        continue;
                    }
                    let a = (best.0 + da * step_alpha).clamp(0.0, ALPHA_MAX);
                    let t = (best.1.ln() + dt * step_log_theta).exp();
                    if (a, t) != (best.0, best.1) {
                        polls.push((a, t));
                    }
                }
            }
            let losses = eval.evaluate(&polls)?;
            let mut moved = false;
            for (&(a, t), l) in polls.iter().zip(&losses) {
                if better((a, t, l.value), best) {
                    best = (a, t, l.value);
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
    }

    let params = PdParams::new(best.0, best.1)?;
    let best_loss = eval.cache[&(best.0.to_bits(), best.1.to_bits())];
    if best_loss.ranks_excluded > 0 {
        warnings.push(format!(
            "{} observed ranks lie beyond the fitted model curve and were excluded",
            best_loss.ranks_excluded
        ));
    }
    let best_seed = if search.common_random_numbers {
        seed
    } else {
        // reproduce the seed used when the optimum was first evaluated
        let idx = eval
            .trace
            .iter()
            .position(|&(a, t, _)| a == best.0 && t == best.1)
            .expect("optimum was evaluated");
        seed.derive(idx as u64)
    };
    let fitted = covered_curve(&params, eval.n_ranks, search.n_samples, best_seed)?;
    Ok(FitResult {
        params,
        loss: best.2,
        n_ranks_used: best_loss.ranks_used,
        curve_samples: search.n_samples,
        grid_trace: eval.trace,
        warnings,
        fitted,
    })
}

/// Median spacing of a sorted grid under `f`, or `fallback` for a single point.
fn grid_step(grid: &[f64], fallback: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut v: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    v.sort_by(f64::total_cmp);
    let mut gaps: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).filter(|g| *g > 0.0).collect();
    if gaps.is_empty() {
        return fallback;
    }
    gaps.sort_by(f64::total_cmp);
    gaps[gaps.len() / 2]
}

/// Layout of a capitalization table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeaderMode {
    /// Treat the first row as a header when its capitalization does not parse.
    #[default]
    Auto,
    Present,
    Absent,
}

/// CSV with `ticker, market_cap` columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CapsFormat {
    pub header: HeaderMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestedCaps {
    pub curve: WeightCurve,
    /// Rows dropped as non-positive or unparseable.
    pub dropped: usize,
    pub warnings: Vec<String>,
}

fn parse_cap(field: &str) -> Option<f64> {
    let cleaned: String = field
        .trim()
        .chars()
        .filter(|c| !matches!(c, ',' | '_' | ' '))
        .collect();
    cleaned.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads `(ticker, market_cap)` rows, drops unusable ones, ranks the rest
/// descending and normalises by their total.
pub fn ingest_caps<R: Read>(source: R, format: CapsFormat) -> Result<IngestedCaps> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut caps: Vec<f64> = Vec::new();
    let mut tickers: HashMap<String, usize> = HashMap::new();
    let mut dropped = 0;
    let mut warnings = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let cap = record.get(1).and_then(parse_cap);
        if i == 0 {
            match format.header {
                HeaderMode::Present => continue,
                HeaderMode::Auto if cap.is_none() => continue,
                _ => {}
            }
        }
        match cap {
            Some(v) if v > 0.0 => {
                caps.push(v);
                *tickers
                    .entry(record.get(0).unwrap_or("").to_string())
                    .or_insert(0) += 1;
            }
            _ => dropped += 1,
        }
    }
    if dropped > 0 {
        warnings.push(format!(
            "dropped {dropped} rows with non-positive or unparseable capitalization"
        ));
    }
    let mut dups: Vec<_> = tickers
        .into_iter()
        .filter(|(_, c)| *c > 1)
        .map(|(t, _)| t)
        .collect();
    if !dups.is_empty() {
        dups.sort();
        warnings.push(format!("duplicate tickers kept: {}", dups.join(", ")));
    }
    if caps.is_empty() {
        return Err(Error::Data("no rows with a positive capitalization".into()));
    }
    let total: f64 = caps.iter().sum();
    caps.sort_by(|a, b| b.total_cmp(a));
    let weights = caps.into_iter().map(|c| c / total).collect();
    Ok(IngestedCaps {
        curve: WeightCurve::from_weights(weights, "observed")?,
        dropped,
        warnings,
    })
}
