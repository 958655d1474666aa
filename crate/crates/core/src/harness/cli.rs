use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array1;
use serde_json::json;

use super::config::{ExperimentConfig, ExperimentKind};
use super::experiments::run_experiment;
use super::lemmas::{validate_effective_noise, validate_restricted_eigs};
use crate::bounds::{PgdBound, ProxMBound, PsgdBound};
use crate::error::{Error, Result};
use crate::gaussian::RngSeed;
use crate::geometry::{log_spaced_grid, minimal_samples, minimal_samples_regularized, Regularizer};
use crate::links::{link_stats, Link, StatsSource};

#[derive(Parser, Debug)]
#[command(name = "shrinkage", version, about = "Single-index model estimators and their guarantees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Overrides {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the configured solver on synthetic instances.
    Solve(Overrides),
    /// Run the experiment named in the config.
    Experiment(Overrides),
    /// Nonlinearity parameters mu, sigma^2, gamma^2 of a link.
    Stats {
        /// sign, linear, cubic, tanh:<c>, quantize:<levels>:<clip>, or a JSON object.
        #[arg(long)]
        link: String,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Minimal sample count n0 (or n0(lambda) with --lambda).
    N0 {
        /// l1, sparsity or l2.
        #[arg(long, default_value = "l1")]
        reg: String,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 0.01)]
        grid_lo: f64,
        #[arg(long, default_value_t = 10.0)]
        grid_hi: f64,
        #[arg(long, default_value_t = 50)]
        grid_points: usize,
    },
    /// Closed-form bound curve as CSV `iter,bound`.
    Bound {
        #[arg(long, value_enum)]
        kind: BoundKind,
        #[arg(long)]
        n: f64,
        #[arg(long)]
        n0: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        /// Initial error (squared for psgd, M0 for prox).
        #[arg(long, default_value_t = 1.0)]
        init: f64,
        /// Contraction of the shrinkage recursion (prox).
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        #[arg(long, default_value_t = 200)]
        iters: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo check of a lemma.
    Validate {
        #[arg(long, value_enum)]
        lemma: LemmaKind,
        #[arg(long, default_value = "sign")]
        link: String,
        #[arg(long, default_value = "l1")]
        reg: String,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3.0)]
        eta: f64,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BoundKind {
    Pgd,
    Psgd,
    Prox,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum LemmaKind {
    RestrictedEigs,
    EffectiveNoise,
}

/// Parses the command-line form of a link.
pub fn parse_link(text: &str) -> Result<Link> {
    let text = text.trim();
    if text.starts_with('{') {
        return serde_json::from_str(text).map_err(|e| Error::Config(format!("link: {e}")));
    }
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| Error::Config(format!("link: bad number `{s}`"))) };
    let link = match parts.as_slice() {
        ["sign"] => Link::Sign,
        ["linear"] => Link::Linear,
        ["cubic"] => Link::Cubic,
        ["tanh", c] => Link::TanhScale { c: num(c)? },
        ["quantize", levels, clip] => Link::Quantize {
            levels: levels.parse().map_err(|_| Error::Config(format!("link: bad level count `{levels}`")))?,
            clip: num(clip)?,
        },
        _ => return Err(Error::Config(format!("unknown link `{text}`"))),
    };
    link.validate()?;
    Ok(link)
}

/// `s`-sparse unit vector with equal magnitudes on the first `s`
/// coordinates; the ℓ1 and sparsity geometry only depends on its support.
fn reference_theta(p: usize, s: usize) -> Result<Array1<f64>> {
    if s == 0 || s > p {
        return Err(Error::Config(format!("need 1 <= s <= p, got s={s}, p={p}")));
    }
    let mut theta = Array1::zeros(p);
    for i in 0..s {
        theta[i] = 1.0 / (s as f64).sqrt();
    }
    Ok(theta)
}

fn parse_reg(name: &str, s: usize) -> Result<Regularizer> {
    match name {
        "l1" | "l1-ball" => Ok(Regularizer::L1Ball { radius: 1.0 }),
        "sparsity" => Ok(Regularizer::Sparsity { s }),
        "l2" | "l2-ball" => Ok(Regularizer::L2Ball { radius: 1.0 }),
        other => Err(Error::Config(format!("unknown regularizer `{other}`"))),
    }
}

fn load(o: &Overrides, kind: Option<ExperimentKind>) -> Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = ExperimentConfig::from_file(&o.config)?;
    if let Some(k) = kind {
        cfg.experiment = k;
    }
    if let Some(seed) = o.seed {
        cfg.seed = RngSeed(seed);
    }
    if let Some(t) = o.trials {
        cfg.trials = t;
    }
    if let Some(out) = &o.out {
        cfg.out = Some(out.clone());
    }
    cfg.validate()?;
    let out = cfg.out.clone().unwrap_or_else(|| {
        o.config
            .file_stem()
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("out"))
    });
    Ok((cfg, out))
}

fn print_json(out: &mut dyn Write, value: &serde_json::Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Solve(o) => {
            let (cfg, dir) = load(&o, Some(ExperimentKind::Solve))?;
            print_json(out, &run_experiment(&cfg, Some(&dir))?)
        }
        Command::Experiment(o) => {
            let (cfg, dir) = load(&o, None)?;
            print_json(out, &run_experiment(&cfg, Some(&dir))?)
        }
        Command::Stats { link, samples, seed } => {
            let link = parse_link(&link)?;
            let st = link_stats(&link, samples, RngSeed(seed))?;
            let mut v = json!({
                "link": link.name(),
                "mu": st.mu,
                "sigma_sq": st.sigma_sq,
                "gamma_sq": st.gamma_sq,
            });
            match st.source {
                StatsSource::Analytic => v["source"] = json!("analytic"),
                StatsSource::MonteCarlo { samples, seed, std_errors } => {
                    v["source"] = json!("monte-carlo");
                    v["samples"] = json!(samples);
                    v["seed"] = json!(seed);
                    v["std_errors"] = json!(std_errors);
                }
            }
            print_json(out, &v)
        }
        Command::N0 { reg, p, s, t, lambda, grid_lo, grid_hi, grid_points } => {
            let theta = reference_theta(p, s)?;
            let r = parse_reg(&reg, s)?;
            let grid = log_spaced_grid(grid_lo, grid_hi, grid_points)?;
            let m = match lambda {
                Some(l) => minimal_samples_regularized(&r, theta.view(), l, t)?,
                None => minimal_samples(&r, theta.view(), t, &grid)?,
            };
            print_json(
                out,
                &json!({
                    "regularizer": r.name(),
                    "p": p,
                    "s": s,
                    "t": m.t,
                    "n0": m.n0,
                    "lambda": m.lambda,
                    "width": m.width,
                    "degenerate": m.degenerate,
                    "grid": {"lo": grid_lo, "hi": grid_hi, "points": grid_points, "spacing": "log"},
                }),
            )
        }
        Command::Bound { kind, n, n0, kappa, p, eta, sigma, gamma, init, rho, iters, out: file } => {
            let curve = match kind {
                BoundKind::Pgd => PgdBound { n, n0, kappa, eta, sigma, gamma, init_error: init }.curve(iters)?,
                BoundKind::Psgd => PsgdBound { n, n0, p, eta, sigma, init_error_sq: init }.curve(iters)?,
                BoundKind::Prox => {
                    let b = ProxMBound { m0: init, rho, eta, sigma, gamma, n, n0_lambda: n0 };
                    let values = (0..iters).map(|t| b.at(t)).collect::<Result<Vec<_>>>()?;
                    crate::bounds::BoundCurve {
                        values,
                        rate: rho,
                        floor: b.increment(),
                        valid: true,
                        inputs: serde_json::to_value(b)?,
                    }
                }
            };
            if !curve.valid {
                return Err(Error::BoundUndefined(format!(
                    "sample condition fails (geometric rate {:.4})",
                    curve.rate
                )));
            }
            match file {
                Some(path) => curve.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?)),
                None => curve.write_csv(out),
            }
        }
        Command::Validate { lemma, link, reg, p, s, n, eta, t, trials, seed } => {
            let theta = reference_theta(p, s)?;
            let r = parse_reg(&reg, s)?;
            let report = match lemma {
                LemmaKind::RestrictedEigs => validate_restricted_eigs(&r, theta.view(), n, t, trials, RngSeed(seed))?,
                LemmaKind::EffectiveNoise => {
                    let link = parse_link(&link)?;
                    validate_effective_noise(&link, &r, theta.view(), n, eta, t, trials, RngSeed(seed))?
                }
            };
            print_json(out, &serde_json::to_value(report)?)
        }
    }
}

/// Entry point of the `shrinkage` binary. Returns the process exit code:
/// 0 on success, 1 for usage or configuration errors, 2 for numerical
/// failures.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Like [`cli_main`] but capturing standard output.
pub fn cli_run<I, T>(argv: I, out: &mut dyn Write) -> std::result::Result<(), (i32, String)>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| (1, e.to_string()))?;
    execute(cli, out).map_err(|e| (e.exit_code(), e.to_string()))
}
