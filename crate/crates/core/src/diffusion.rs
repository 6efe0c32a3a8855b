//! Market model driven by Wright-Fisher stick diffusions.
//!
//! Stick `n` follows
//! `dZ_n = 1/2 [(1 - alpha)(1 - Z_n) - (theta + alpha n) Z_n] dt + sqrt(Z_n (1 - Z_n)) dB_n`
//! with stationary law `Beta(1 - alpha, theta + n alpha)`. Weights are
//! rebuilt by stick-breaking, the total market value follows
//! `dM = 1/2 (theta - c M) dt + sqrt(M) dB` with stationary `Gamma(theta, c)`,
//! and prices are restored as `P_n = M X_n / q_n`.
//!
//! Time stepping is Euler-Maruyama with full truncation: each process
//! carries an unconstrained auxiliary value, drift and diffusion
//! coefficients are evaluated at that value clamped into the domain, and
//! the reported state is the clamped value. Clamping the propagated value
//! instead biases the stationary mean of sticks whose lower boundary is
//! attainable (`1 - alpha < 1`) by several percent.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::params::PdParams;
use crate::samplers::{break_sticks, PdRng, RankedWeights, RngSeed, TruncationRule};

/// Unclamped Euler-Maruyama update of the auxiliary value of
/// `dZ = 1/2 [a(1-Z) - bZ] dt + sqrt(Z(1-Z)) dB`, coefficients taken at
/// `clamp(z, 0, 1)`.
pub fn wf_advance(z: f64, a: f64, b: f64, dt: f64, noise: f64) -> f64 {
    let zc = z.clamp(0.0, 1.0);
    let drift = 0.5 * (a * (1.0 - zc) - b * zc);
    let vol = (zc * (1.0 - zc)).sqrt();
    z + drift * dt + vol * dt.sqrt() * noise
}

/// One Euler-Maruyama step of the Wright-Fisher stick with the result
/// clamped to `[0, 1]`.
pub fn wf_step(z: f64, a: f64, b: f64, dt: f64, noise: f64) -> f64 {
    wf_advance(z.clamp(0.0, 1.0), a, b, dt, noise).clamp(0.0, 1.0)
}

/// Unclamped update of the auxiliary value of `dM = 1/2 (theta - c M) dt + sqrt(M) dB`.
pub fn market_advance(m: f64, theta: f64, c: f64, dt: f64, noise: f64) -> f64 {
    let mc = m.max(0.0);
    m + 0.5 * (theta - c * mc) * dt + mc.sqrt() * dt.sqrt() * noise
}

/// One Euler-Maruyama step of the market value, result clamped to `>= 0`.
pub fn market_step(m: f64, theta: f64, c: f64, dt: f64, noise: f64) -> f64 {
    market_advance(m.max(0.0), theta, c, dt, noise).max(0.0)
}

/// Stick fractions reproducing the given weights:
/// `Z_1 = X_1`, `Z_n = X_n / (1 - sum_{i<n} X_i)`.
pub fn init_sticks(x0: &[f64]) -> Result<Vec<f64>> {
    let mut used = 0.0;
    let mut z = Vec::with_capacity(x0.len());
    for (i, &x) in x0.iter().enumerate() {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Data(format!("weight {} is {x}, outside [0,1]", i + 1)));
        }
        let left = 1.0 - used;
        if left <= 1e-12 {
            return Err(Error::Data(format!(
                "weights before index {} leave no mass (1 - sum = {left:e})",
                i + 1
            )));
        }
        z.push((x / left).clamp(0.0, 1.0));
        used += x;
    }
    Ok(z)
}

/// Weights from stick fractions: `X_1 = Z_1`, `X_n = Z_n (1 - sum_{i<n} X_i)`.
pub fn sticks_to_weights(z: &[f64]) -> Vec<f64> {
    let mut left = 1.0;
    z.iter()
        .map(|&zi| {
            let x = zi * left;
            left -= x;
            x
        })
        .collect()
}

/// How the weights at time zero are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialWeights {
    /// Draw the stick fractions from their stationary Beta laws.
    Stationary,
    Given(RankedWeights),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionConfig {
    pub params: PdParams,
    pub n_sticks: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Initial market value; also the stationary mean `theta / c`.
    pub m0: f64,
    /// Shares outstanding `q_n`, at least `n_sticks` entries.
    pub shares: Vec<f64>,
    pub x0: InitialWeights,
    pub seed: RngSeed,
    /// Record every `record_every`-th step (time zero is always recorded).
    pub record_every: usize,
}

impl DiffusionConfig {
    /// Unit shares, stationary start, seed 0, every step recorded.
    pub fn new(params: PdParams, n_sticks: usize, dt: f64, t_end: f64, m0: f64) -> Self {
        Self {
            params,
            n_sticks,
            dt,
            t_end,
            m0,
            shares: vec![1.0; n_sticks],
            x0: InitialWeights::Stationary,
            seed: RngSeed(0),
            record_every: 1,
        }
    }

    /// Largest stable time step: `1 / (theta + alpha K + 1)`.
    pub fn max_dt(&self) -> f64 {
        1.0 / (self.params.theta() + self.params.alpha() * self.n_sticks as f64 + 1.0)
    }

    /// Market mean-reversion scale `c = theta / M(0)`.
    pub fn market_scale(&self) -> f64 {
        self.params.theta() / self.m0
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        if !p.is_infinite() {
            return Err(Error::Unsupported(format!(
                "stick diffusion needs 0 <= alpha < 1, got {p}"
            )));
        }
        if !(p.theta() > 0.0) {
            return Err(Error::Domain(format!(
                "market diffusion needs theta > 0, got {}",
                p.theta()
            )));
        }
        if self.n_sticks == 0 {
            return Err(Error::Config("n_sticks must be >= 1".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.dt < self.max_dt()) {
            return Err(Error::Config(format!(
                "dt = {} is unstable; use dt < 1/(theta + alpha K + 1) = {:e}",
                self.dt,
                self.max_dt()
            )));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::Config(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        if !(self.m0 > 0.0) || !self.m0.is_finite() {
            return Err(Error::Config(format!(
                "initial market value must be positive, got {}",
                self.m0
            )));
        }
        if 0.5 * self.market_scale() * self.dt >= 1.0 {
            return Err(Error::Config(format!(
                "dt = {} is unstable for the market diffusion; use dt < 2 M(0)/theta = {:e}",
                self.dt,
                2.0 / self.market_scale()
            )));
        }
        if self.shares.len() < self.n_sticks {
            return Err(Error::Config(format!(
                "need {} share counts, got {}",
                self.n_sticks,
                self.shares.len()
            )));
        }
        if self.shares.iter().any(|q| !(*q > 0.0)) {
            return Err(Error::Config("share counts must be positive".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be >= 1".into()));
        }
        if let InitialWeights::Given(w) = &self.x0 {
            if w.len() < self.n_sticks {
                return Err(Error::Config(format!(
                    "initial weights have {} entries, need {}",
                    w.len(),
                    self.n_sticks
                )));
            }
        }
        Ok(())
    }

    pub fn total_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionState {
    pub t: f64,
    pub z: Vec<f64>,
    pub x: Vec<f64>,
    pub m: f64,
}

impl DiffusionState {
    /// Mass outside the `K` simulated sticks.
    pub fn residual(&self) -> f64 {
        (1.0 - self.x.iter().sum::<f64>()).max(0.0)
    }
}

/// Stepper holding the state and one noise stream per stick plus one for `M`.
#[derive(Debug, Clone)]
pub struct Diffusion {
    cfg: DiffusionConfig,
    state: DiffusionState,
    stick_aux: Vec<f64>,
    market_aux: f64,
    stick_rngs: Vec<PdRng>,
    market_rng: PdRng,
    steps_done: usize,
    a: f64,
    b: Vec<f64>,
    c: f64,
}

impl Diffusion {
    pub fn new(cfg: DiffusionConfig) -> Result<Self> {
        cfg.validate()?;
        let k = cfg.n_sticks;
        let z = match &cfg.x0 {
            InitialWeights::Stationary => {
                let mut rng = cfg.seed.derive(k as u64 + 1).rng();
                break_sticks(&cfg.params, TruncationRule::Fixed(k), &mut rng)?.fractions
            }
            InitialWeights::Given(w) => init_sticks(&w.weights()[..k])?,
        };
        let (alpha, theta) = (cfg.params.alpha(), cfg.params.theta());
        let state = DiffusionState {
            t: 0.0,
            x: sticks_to_weights(&z),
            z,
            m: cfg.m0,
        };
        Ok(Self {
            stick_aux: state.z.clone(),
            market_aux: state.m,
            stick_rngs: (0..k).map(|i| cfg.seed.derive(i as u64).rng()).collect(),
            market_rng: cfg.seed.derive(k as u64).rng(),
            a: 1.0 - alpha,
            b: (1..=k).map(|n| theta + alpha * n as f64).collect(),
            c: cfg.market_scale(),
            cfg,
            state,
            steps_done: 0,
        })
    }

    pub fn state(&self) -> &DiffusionState {
        &self.state
    }

    pub fn config(&self) -> &DiffusionConfig {
        &self.cfg
    }

    pub fn steps_done(&self) -> usize {
        self.steps_done
    }

    pub fn step(&mut self) {
        let dt = self.cfg.dt;
        for (((aux, z), b), rng) in self
            .stick_aux
            .iter_mut()
            .zip(self.state.z.iter_mut())
            .zip(&self.b)
            .zip(&mut self.stick_rngs)
        {
            let noise: f64 = StandardNormal.sample(rng);
            *aux = wf_advance(*aux, self.a, *b, dt, noise);
            *z = aux.clamp(0.0, 1.0);
        }
        let noise: f64 = StandardNormal.sample(&mut self.market_rng);
        self.market_aux = market_advance(self.market_aux, self.cfg.params.theta(), self.c, dt, noise);
        self.state.m = self.market_aux.max(0.0);
        self.state.x = sticks_to_weights(&self.state.z);
        self.steps_done += 1;
        self.state.t = self.steps_done as f64 * dt;
    }

    /// Prices `P_n = M X_n / q_n` at the current state.
    pub fn prices(&self) -> Vec<f64> {
        self.state
            .x
            .iter()
            .zip(&self.cfg.shares)
            .map(|(x, q)| self.state.m * x / q)
            .collect()
    }
}

/// Recorded paths of weights, market value and restored prices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PricePaths {
    pub times: Vec<f64>,
    pub prices: Vec<Vec<f64>>,
    pub weights: Vec<Vec<f64>>,
    pub market: Vec<f64>,
}

impl PricePaths {
    fn record(&mut self, sim: &Diffusion) {
        let s = sim.state();
        self.times.push(s.t);
        self.weights.push(s.x.clone());
        self.market.push(s.m);
        self.prices.push(sim.prices());
    }

    /// CSV with columns `t,M,x1..xK,p1..pK`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let k = self.weights.first().map_or(0, Vec::len);
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string(), "M".to_string()];
        header.extend((1..=k).map(|i| format!("x{i}")));
        header.extend((1..=k).map(|i| format!("p{i}")));
        w.write_record(&header)?;
        for i in 0..self.times.len() {
            let mut rec = vec![self.times[i].to_string(), self.market[i].to_string()];
            rec.extend(self.weights[i].iter().map(f64::to_string));
            rec.extend(self.prices[i].iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn simulate(cfg: &DiffusionConfig) -> Result<PricePaths> {
    let mut sim = Diffusion::new(cfg.clone())?;
    let mut paths = PricePaths::default();
    paths.record(&sim);
    for step in 1..=cfg.total_steps() {
        sim.step();
        if step % cfg.record_every == 0 {
            paths.record(&sim);
        }
    }
    Ok(paths)
}
