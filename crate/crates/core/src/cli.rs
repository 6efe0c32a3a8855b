//! The `pdmarket` command-line front end.
//!
//! Every subcommand takes `--seed` (default 0), `--format`, `--output` and
//! `--threads`. Output is byte-identical for a fixed seed whatever the
//! thread count.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::chain::{run_chain, ChainConfig, ChainInit};
use crate::diffusion::{simulate, DiffusionConfig};
use crate::error::{Error, Result};
use crate::fitting::{
    average_pd_curve_with, default_curve_truncation, fit_params, ingest_caps, CapsFormat, SearchConfig,
};
use crate::laws::psf_table;
use crate::params::{PdParams, Regime};
use crate::partition::multiplicity;
use crate::samplers::{
    broken_stick_expected, par_ensemble, sample_broken_stick, sample_crp, sample_sticks_size_biased,
    sample_symmetric_dirichlet, RankedWeights, RngSeed, TemperedStableSubordinator, TruncationRule,
};

#[derive(Debug, Parser)]
#[command(
    name = "pdmarket",
    version,
    about = "Poisson-Dirichlet partition structures for capital distribution curves"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for every random stream
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output format [default: csv, json for fit]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads (default: all cores); never changes the output
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Model {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
}

impl Model {
    fn params(&self) -> Result<PdParams> {
        PdParams::new(self.alpha, self.theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Size-biased stick-breaking (all regimes)
    Sticks,
    /// Tempered stable subordinator (0 < alpha < 1, theta > 0)
    Subordinator,
    /// Ranked symmetric Dirichlet (alpha < 0)
    Dirichlet,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact Pitman sampling formula over all classes of n
    Exact {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        common: Common,
    },
    /// Ranked Poisson-Dirichlet weight samples
    Sample {
        #[command(flatten)]
        model: Model,
        #[arg(long, default_value_t = 1)]
        samples: usize,
        /// Largest weights reported per sample
        #[arg(long, default_value_t = 10)]
        ranks: usize,
        #[arg(long, value_enum, default_value_t = Method::Sticks)]
        method: Method,
        /// Stick-breaking stops once the unbroken remainder drops below this
        #[arg(long, default_value_t = 1e-8)]
        trunc_eps: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Chinese restaurant process partitions of n customers
    Crp {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        model: Model,
        #[arg(long, default_value_t = 1)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Averaged ranked-weight curve
    Curve {
        #[command(flatten)]
        model: Model,
        #[arg(long, default_value_t = 500)]
        ranks: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1e-8)]
        trunc_eps: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Least-squares fit of (alpha, theta) to a ticker,cap CSV
    Fit {
        /// Caps CSV; standard input when absent
        #[arg(long)]
        input: Option<PathBuf>,
        /// Fit only the largest this many ranks
        #[arg(long, default_value_t = 500)]
        ranks: usize,
        /// Samples averaged per model curve
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Pattern-search rounds after the grid
        #[arg(long, default_value_t = 4)]
        rounds: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Down-up chain on partitions of n
    SimulateDu {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        model: Model,
        #[arg(long)]
        steps: usize,
        /// Largest weights recorded per row
        #[arg(long, default_value_t = 5)]
        ranks: usize,
        /// Steps between records [default: n]
        #[arg(long)]
        thin: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Wright-Fisher stick diffusion with market value and prices
    SimulateDiffusion {
        #[command(flatten)]
        model: Model,
        #[arg(long, default_value_t = 10)]
        k_sticks: usize,
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        /// Initial and mean market value
        #[arg(long, default_value_t = 1.0)]
        m0: f64,
        /// Steps between records
        #[arg(long, default_value_t = 100)]
        record_every: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Expected ranked pieces of a stick broken at n - 1 uniform points
    BrokenStick {
        #[arg(long)]
        n: usize,
        /// Also report Monte Carlo means from this many draws
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Exact { common, .. }
            | Command::Sample { common, .. }
            | Command::Crp { common, .. }
            | Command::Curve { common, .. }
            | Command::Fit { common, .. }
            | Command::SimulateDu { common, .. }
            | Command::SimulateDiffusion { common, .. }
            | Command::BrokenStick { common, .. } => common,
        }
    }
}

/// Parses `args` (program name first) and runs, printing to the process
/// streams. Returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(args, &mut io::stdout().lock(), &mut io::stderr().lock())
}

/// [`run`] with explicit streams: 0 on success, 1 on a module error, 2 on a
/// usage error.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let mut text = e.render().to_string();
            return if e.use_stderr() {
                if !text.contains("Usage:") {
                    text = format!("{}\n\n{text}", Cli::command().render_usage());
                }
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    match execute(&cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let detail = e.to_string().replace('\n', " ");
            let _ = writeln!(stderr, "error: {detail}");
            1
        }
    }
}

fn execute(cmd: &Command, stdout: &mut dyn Write) -> Result<()> {
    let common = cmd.common();
    let mut buf = Vec::new();
    match common.threads {
        Some(0) => return Err(Error::Config("--threads must be >= 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(|| dispatch(cmd, &mut buf))?,
        None => dispatch(cmd, &mut buf)?,
    }
    match &common.output {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            f.write_all(&buf)?;
            f.flush()?;
        }
        None => stdout.write_all(&buf)?,
    }
    Ok(())
}

fn write_json(out: &mut Vec<u8>, v: &Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, v).map_err(|e| Error::Io(e.to_string()))?;
    out.push(b'\n');
    Ok(())
}

fn csv_writer(out: &mut Vec<u8>) -> csv::Writer<&mut Vec<u8>> {
    csv::WriterBuilder::new().flexible(true).from_writer(out)
}

fn weight_header(prefix: &str, width: usize) -> Vec<String> {
    let mut h = vec![prefix.to_string()];
    h.extend((1..=width).map(|i| format!("x{i}")));
    h
}

fn dispatch(cmd: &Command, out: &mut Vec<u8>) -> Result<()> {
    let common = cmd.common();
    let seed = RngSeed(common.seed);
    let format = common.format.unwrap_or(match cmd {
        Command::Fit { .. } => Format::Json,
        _ => Format::Csv,
    });
    match cmd {
        Command::Exact { n, model, .. } => exact(*n, &model.params()?, format, out),
        Command::Sample {
            model,
            samples,
            ranks,
            method,
            trunc_eps,
            ..
        } => sample(
            &model.params()?,
            *samples,
            *ranks,
            *method,
            *trunc_eps,
            seed,
            format,
            out,
        ),
        Command::Crp {
            n, model, samples, ..
        } => {
            let p = model.params()?;
            let draws = par_ensemble(seed, *samples, |_, rng| sample_crp(*n, &p, rng));
            let draws = draws.into_iter().collect::<Result<Vec<_>>>()?;
            match format {
                Format::Csv => {
                    let mut w = csv_writer(out);
                    w.write_record(["sample", "k", "shape"])?;
                    for (i, f) in draws.iter().enumerate() {
                        w.write_record([i.to_string(), f.k().to_string(), f.to_string()])?;
                    }
                    w.flush()?;
                    Ok(())
                }
                Format::Json => {
                    let shapes: Vec<&[usize]> = draws.iter().map(|f| f.blocks()).collect();
                    write_json(out, &json!({ "n": n, "shapes": shapes }))
                }
            }
        }
        Command::Curve {
            model,
            ranks,
            samples,
            trunc_eps,
            ..
        } => {
            let p = model.params()?;
            let trunc = match default_curve_truncation(*ranks) {
                TruncationRule::Residual { max_sticks, .. } => TruncationRule::Residual {
                    eps: *trunc_eps,
                    max_sticks,
                },
                fixed => fixed,
            };
            let c = average_pd_curve_with(&p, *ranks, *samples, seed, trunc)?;
            match format {
                Format::Csv => {
                    let mut w = csv_writer(out);
                    w.write_record(["rank", "weight"])?;
                    for (r, x) in c.ranks.iter().zip(&c.weights) {
                        w.write_record([r.to_string(), x.to_string()])?;
                    }
                    w.flush()?;
                    Ok(())
                }
                Format::Json => write_json(
                    out,
                    &json!({ "label": c.label, "ranks": c.ranks, "weights": c.weights }),
                ),
            }
        }
        Command::Fit {
            input,
            ranks,
            samples,
            rounds,
            ..
        } => {
            let mut text = Vec::new();
            match input {
                Some(path) => {
                    File::open(path)
                        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?
                        .read_to_end(&mut text)?;
                }
                None => {
                    io::stdin().read_to_end(&mut text)?;
                }
            }
            let caps = ingest_caps(text.as_slice(), CapsFormat::default())?;
            let observed = caps.curve.truncated(*ranks);
            let search = SearchConfig {
                n_samples: *samples,
                refine_rounds: *rounds,
                ..SearchConfig::default()
            };
            let mut fit = fit_params(&observed, &search, seed)?;
            let mut warnings = caps.warnings;
            warnings.append(&mut fit.warnings);
            fit.warnings = warnings;
            match format {
                Format::Json => {
                    out.extend_from_slice(fit.to_json().as_bytes());
                    out.push(b'\n');
                    Ok(())
                }
                Format::Csv => fit.write_curves_csv(&observed, out),
            }
        }
        Command::SimulateDu {
            n,
            model,
            steps,
            ranks,
            thin,
            ..
        } => {
            let mut cfg = ChainConfig::new(*n, model.params()?, *steps);
            cfg.record_top = *ranks;
            cfg.seed = seed;
            if let Some(t) = thin {
                cfg.thin = *t;
            }
            let traj = run_chain(&cfg, &ChainInit::Stationary)?;
            match format {
                Format::Csv => traj.write_csv(out),
                Format::Json => write_json(out, &json!({ "steps": traj.times, "top_weights": traj.series })),
            }
        }
        Command::SimulateDiffusion {
            model,
            k_sticks,
            dt,
            t_end,
            m0,
            record_every,
            ..
        } => {
            let mut cfg = DiffusionConfig::new(model.params()?, *k_sticks, *dt, *t_end, *m0);
            cfg.seed = seed;
            cfg.record_every = *record_every;
            let paths = simulate(&cfg)?;
            match format {
                Format::Csv => paths.write_csv(out),
                Format::Json => write_json(
                    out,
                    &json!({
                        "t": paths.times,
                        "market": paths.market,
                        "weights": paths.weights,
                        "prices": paths.prices,
                    }),
                ),
            }
        }
        Command::BrokenStick { n, samples, .. } => {
            if *n == 0 {
                return Err(Error::Domain("broken stick needs n >= 1".into()));
            }
            let expected = broken_stick_expected(*n);
            let mc = if *samples > 0 {
                let draws = par_ensemble(seed, *samples, |_, rng| sample_broken_stick(*n, rng));
                let mut sums = vec![0.0; *n];
                for d in draws {
                    for (s, x) in sums.iter_mut().zip(d?.weights()) {
                        *s += x;
                    }
                }
                Some(
                    sums.into_iter()
                        .map(|s| s / *samples as f64)
                        .collect::<Vec<f64>>(),
                )
            } else {
                None
            };
            match format {
                Format::Csv => {
                    let line = |v: &[f64]| v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", ");
                    writeln!(out, "{}", line(&expected))?;
                    if let Some(mc) = mc {
                        writeln!(out, "{}", line(&mc))?;
                    }
                    Ok(())
                }
                Format::Json => write_json(out, &json!({ "expected": expected, "monte_carlo": mc })),
            }
        }
    }
}

fn exact(n: usize, p: &PdParams, format: Format, out: &mut Vec<u8>) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("exact tables need n >= 1".into()));
    }
    if n > 60 {
        return Err(Error::Config(format!(
            "exact tables are limited to n <= 60, got {n}"
        )));
    }
    let table = psf_table(n, p)?;
    match format {
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["class", "multiplicity", "probability"])?;
            for (f, prob) in &table {
                let class = f
                    .blocks()
                    .iter()
                    .map(|b| b.to_string())
                    .collect::<Vec<_>>()
                    .join(" ");
                w.write_record([class, multiplicity(&f.to_class()).to_string(), prob.to_string()])?;
            }
            w.flush()?;
            Ok(())
        }
        Format::Json => {
            let rows: Vec<Value> = table
                .iter()
                .map(|(f, prob)| {
                    let m = multiplicity(&f.to_class());
                    let m = match m.to_u64() {
                        Some(v) => json!(v),
                        None => json!(m.to_string()),
                    };
                    json!({ "class": f.blocks(), "multiplicity": m, "probability": prob })
                })
                .collect();
            write_json(
                out,
                &json!({ "n": n, "alpha": p.alpha(), "theta": p.theta(), "rows": rows }),
            )
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn sample(
    p: &PdParams,
    samples: usize,
    ranks: usize,
    method: Method,
    trunc_eps: f64,
    seed: RngSeed,
    format: Format,
    out: &mut Vec<u8>,
) -> Result<()> {
    if samples == 0 || ranks == 0 {
        return Err(Error::Config("--samples and --ranks must be >= 1".into()));
    }
    let draws: Vec<RankedWeights> = match method {
        Method::Sticks => {
            let trunc = TruncationRule::Residual {
                eps: trunc_eps,
                max_sticks: TruncationRule::default().cap().max(ranks),
            };
            par_ensemble(seed, samples, |_, rng| sample_sticks_size_biased(p, trunc, rng))
                .into_iter()
                .collect::<Result<_>>()?
        }
        Method::Subordinator => {
            let sub = TemperedStableSubordinator::new(p)?;
            par_ensemble(seed, samples, |_, rng| sub.sample(ranks, rng).map(|s| s.weights))
                .into_iter()
                .collect::<Result<_>>()?
        }
        Method::Dirichlet => {
            let m = match p.regime() {
                Regime::Finite { m } => m,
                Regime::Infinite => {
                    return Err(Error::Unsupported(format!(
                        "the Dirichlet method needs alpha < 0, got {p}"
                    )))
                }
            };
            par_ensemble(seed, samples, |_, rng| {
                sample_symmetric_dirichlet(m, -p.alpha(), rng)
            })
            .into_iter()
            .collect::<Result<_>>()?
        }
    };
    match format {
        Format::Csv => {
            let mut w = csv_writer(out);
            let mut header = weight_header("sample", ranks);
            header.push("residual".into());
            w.write_record(&header)?;
            for (i, d) in draws.iter().enumerate() {
                let kept = &d.weights()[..ranks.min(d.len())];
                let tail: f64 = d.weights()[kept.len()..].iter().sum::<f64>() + d.residual();
                let mut rec = vec![i.to_string()];
                rec.extend((0..ranks).map(|r| kept.get(r).copied().unwrap_or(0.0).to_string()));
                rec.push(tail.to_string());
                w.write_record(&rec)?;
            }
            w.flush()?;
            Ok(())
        }
        Format::Json => {
            let rows: Vec<Value> = draws
                .iter()
                .map(|d| {
                    let kept = &d.weights()[..ranks.min(d.len())];
                    let tail: f64 = d.weights()[kept.len()..].iter().sum::<f64>() + d.residual();
                    json!({ "weights": kept, "residual": tail })
                })
                .collect();
            write_json(
                out,
                &json!({ "alpha": p.alpha(), "theta": p.theta(), "samples": rows }),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["pdmarket"];
        full.extend_from_slice(args);
        let code = run_with(full, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn broken_stick_line() {
        let (code, out, _) = call(&["broken-stick", "--n", "3"]);
        assert_eq!(code, 0);
        assert_eq!(out, "0.611111, 0.277778, 0.111111\n");
    }

    #[test]
    fn exact_table_sums_to_one() {
        let (code, out, _) = call(&["exact", "--n", "4", "--alpha", "0.5", "--theta", "1"]);
        assert_eq!(code, 0);
        let rows: Vec<&str> = out.lines().skip(1).collect();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0].split(',').next(), Some("4"));
        let total: f64 = rows
            .iter()
            .map(|r| r.rsplit(',').next().unwrap().parse::<f64>().unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn error_categories_and_usage() {
        let (code, _, err) = call(&["exact", "--n", "4", "--alpha", "1.5", "--theta", "1"]);
        assert_eq!(code, 1);
        assert!(err.starts_with("error: domain: "), "{err}");
        assert_eq!(err.lines().count(), 1);
        let (code, _, err) = call(&["exact", "--n", "4"]);
        assert_eq!(code, 2);
        assert!(err.contains("Usage"));
        let (code, _, _) = call(&["bogus"]);
        assert_eq!(code, 2);
        let (code, out, _) = call(&["sample", "--help"]);
        assert_eq!(code, 0);
        for flag in [
            "--alpha",
            "--theta",
            "--seed",
            "--format",
            "--output",
            "--threads",
            "--trunc-eps",
        ] {
            assert!(out.contains(flag), "{flag} missing from help");
        }
    }

    #[test]
    fn threads_do_not_change_output() {
        let base = [
            "sample",
            "--alpha",
            "0.5",
            "--theta",
            "2",
            "--samples",
            "20",
            "--seed",
            "4",
        ];
        let (_, one, _) = call(&[&base[..], &["--threads", "1"]].concat());
        let (_, three, _) = call(&[&base[..], &["--threads", "3"]].concat());
        assert_eq!(one, three);
        assert_eq!(one.lines().count(), 21);
    }
}
