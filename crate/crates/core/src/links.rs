//! Link functions and the nonlinearity statistics that govern estimation.
//!
//! For a link `f` and `g ~ N(0,1)` the three statistics are
//! `μ = E[f(g)g]`, `σ² = E[(f(g) − μg)²]` and `γ² = E[g²(f(g) − μg)²]`.
//! The observations `y = f(Xθ*)` then behave like the linear model
//! `μXθ* + w` with effective noise `w = f(Xθ*) − μXθ*`.

use std::fmt;
use std::sync::Arc;

use ndarray::{Array1, ArrayView1};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{gamma_mean_norm, standard_normal_vec, DesignMatrix, RngSeed};
use crate::running::Welford;

const FRAC_2_PI: f64 = std::f64::consts::FRAC_2_PI;

/// A pure scalar function supplied by the caller.
#[derive(Clone)]
pub struct CustomLink {
    pub name: String,
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CustomLink {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        CustomLink {
            name: name.into(),
            f: Arc::new(f),
        }
    }
}

impl fmt::Debug for CustomLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLink").field("name", &self.name).finish()
    }
}

impl PartialEq for CustomLink {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && Arc::ptr_eq(&self.f, &other.f)
    }
}

/// The scalar nonlinearity `f` in `y_i = f(⟨x_i, θ*⟩)`.
///
/// Config files name a link by a tagged object, e.g. `{"kind": "sign"}`
/// or `{"kind": "quantize", "levels": 16, "clip": 3.0}`. Custom links
/// exist only in code.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Link {
    Linear,
    /// `sign(z)` with `sign(0) = +1`.
    Sign,
    /// Uniform midpoint quantizer with `levels` cells on `[−clip, clip]`,
    /// saturating outside.
    Quantize { levels: u32, clip: f64 },
    /// `tanh(c·z)`.
    TanhScale { c: f64 },
    /// `z³`.
    Cubic,
    #[serde(skip)]
    Custom(CustomLink),
}

impl Link {
    pub fn custom(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Link::Custom(CustomLink::new(name, f))
    }

    /// Evaluate at a single point.
    pub fn eval(&self, z: f64) -> f64 {
        match self {
            Link::Linear => z,
            Link::Sign => {
                if z >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Link::Quantize { levels, clip } => quantize(z, *levels, *clip),
            Link::TanhScale { c } => (c * z).tanh(),
            Link::Cubic => z * z * z,
            Link::Custom(c) => (c.f)(z),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Link::Linear => "linear".into(),
            Link::Sign => "sign".into(),
            Link::Quantize { levels, clip } => format!("quantize({levels},{clip})"),
            Link::TanhScale { c } => format!("tanh-scale({c})"),
            Link::Cubic => "cubic".into(),
            Link::Custom(c) => format!("custom({})", c.name),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Link::Quantize { levels, clip } => {
                if *levels == 0 {
                    return Err(Error::Config("quantize link needs levels >= 1".into()));
                }
                if !(*clip > 0.0) || !clip.is_finite() {
                    return Err(Error::Config(format!("quantize link needs clip > 0, got {clip}")));
                }
            }
            Link::TanhScale { c } if !c.is_finite() => {
                return Err(Error::Config(format!("tanh-scale needs finite c, got {c}")));
            }
            _ => {}
        }
        Ok(())
    }
}

fn quantize(z: f64, levels: u32, clip: f64) -> f64 {
    let width = 2.0 * clip / levels as f64;
    let cell = ((z + clip) / width).floor();
    let cell = cell.clamp(0.0, (levels - 1) as f64);
    -clip + width * (cell + 0.5)
}

/// Apply `link` elementwise.
pub fn apply_link(link: &Link, z: ArrayView1<f64>) -> Result<Array1<f64>> {
    let out = z.mapv(|v| link.eval(v));
    if let Link::Custom(_) = link {
        if let Some((index, &value)) = out.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Evaluation { index, value });
        }
    }
    Ok(out)
}

/// Where a [`LinkStats`] value came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StatsSource {
    Analytic,
    MonteCarlo {
        samples: usize,
        seed: RngSeed,
        /// Standard errors of `(μ, σ², γ²)`.
        std_errors: [f64; 3],
    },
}

/// The nonlinearity triple `(μ, σ², γ²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkStats {
    pub mu: f64,
    pub sigma_sq: f64,
    pub gamma_sq: f64,
    pub source: StatsSource,
}

impl LinkStats {
    pub fn sigma(&self) -> f64 {
        self.sigma_sq.sqrt()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma_sq.sqrt()
    }

    pub fn std_errors(&self) -> Option<[f64; 3]> {
        match self.source {
            StatsSource::Analytic => None,
            StatsSource::MonteCarlo { std_errors, .. } => Some(std_errors),
        }
    }
}

/// Closed-form statistics for the links that have them.
pub fn link_stats_analytic(link: &Link) -> Result<LinkStats> {
    let (mu, sigma_sq, gamma_sq) = match link {
        Link::Linear => (1.0, 0.0, 0.0),
        // E|g| = √(2/π), E|g|³ = 2√(2/π), E g⁴ = 3.
        Link::Sign => {
            let mu = FRAC_2_PI.sqrt();
            (mu, 1.0 - FRAC_2_PI, 1.0 - FRAC_2_PI)
        }
        // E g⁴ = 3, E g⁶ = 15, E g⁸ = 105.
        Link::Cubic => (3.0, 6.0, 42.0),
        other => {
            return Err(Error::Unsupported(format!(
                "no closed-form statistics for link {}; use link_stats_mc",
                other.name()
            )))
        }
    };
    Ok(LinkStats {
        mu,
        sigma_sq,
        gamma_sq,
        source: StatsSource::Analytic,
    })
}

/// Monte Carlo statistics from `samples` standard normal draws.
///
/// `μ` is estimated as the least-squares coefficient `Σf(g)g / Σg²`,
/// whose limit is `E[f(g)g]` because `E g² = 1`; it is then plugged into
/// the `σ²` and `γ²` estimators over the same draws. For a linear link the
/// residual `f(g) − μ̂g` vanishes to rounding.
pub fn link_stats_mc(link: &Link, samples: usize, seed: RngSeed) -> Result<LinkStats> {
    if samples < 1000 {
        return Err(Error::Domain(format!(
            "link_stats_mc needs at least 1000 samples, got {samples}"
        )));
    }
    let eval = |index: usize, g: f64| {
        let v = link.eval(g);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { index, value: v })
        }
    };

    let mut cross = 0.0;
    let mut energy = 0.0;
    let mut rng = seed.rng();
    for i in 0..samples {
        let g: f64 = StandardNormal.sample(&mut rng);
        cross += eval(i, g)? * g;
        energy += g * g;
    }
    let mu = cross / energy;

    // Replay the same draws.
    let mut mean_term = Welford::default();
    let mut variance_term = Welford::default();
    let mut deviation_term = Welford::default();
    let mut rng = seed.rng();
    for i in 0..samples {
        let g: f64 = StandardNormal.sample(&mut rng);
        let r = eval(i, g)? - mu * g;
        // influence function of the ratio estimator
        mean_term.push(r * g);
        variance_term.push(r * r);
        deviation_term.push(g * g * r * r);
    }
    let mean_square = energy / samples as f64;

    Ok(LinkStats {
        mu,
        sigma_sq: variance_term.mean().max(0.0),
        gamma_sq: deviation_term.mean().max(0.0),
        source: StatsSource::MonteCarlo {
            samples,
            seed,
            std_errors: [
                mean_term.std_error() / mean_square,
                variance_term.std_error(),
                deviation_term.std_error(),
            ],
        },
    })
}

/// Analytic statistics when registered, otherwise Monte Carlo with
/// `mc_samples` draws.
pub fn link_stats(link: &Link, mc_samples: usize, seed: RngSeed) -> Result<LinkStats> {
    match link_stats_analytic(link) {
        Ok(s) => Ok(s),
        Err(Error::Unsupported(_)) => link_stats_mc(link, mc_samples, seed),
        Err(e) => Err(e),
    }
}

/// `w = f(Xθ*) − μXθ*` and its Euclidean norm.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveNoise {
    pub w: Array1<f64>,
    pub norm: f64,
}

pub(crate) fn check_unit_norm(theta: ArrayView1<f64>) -> Result<()> {
    let norm = theta.dot(&theta).sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Precondition(format!(
            "theta_star must have unit Euclidean norm, got {norm}"
        )));
    }
    Ok(())
}

pub fn effective_noise(
    link: &Link,
    x: &DesignMatrix,
    theta_star: ArrayView1<f64>,
    mu: f64,
) -> Result<EffectiveNoise> {
    if theta_star.len() != x.cols() {
        return Err(Error::Dimension {
            what: "theta_star",
            expected: x.cols(),
            found: theta_star.len(),
        });
    }
    check_unit_norm(theta_star)?;
    let z = x.data().dot(&theta_star);
    let w = apply_link(link, z.view())? - &(mu * &z);
    let norm = w.dot(&w).sqrt();
    Ok(EffectiveNoise { w, norm })
}

/// Empirical estimate of the concentration probability `p(η)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationEstimate {
    pub eta: f64,
    pub p_hat: f64,
    pub trials: usize,
    pub std_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Per-trial normalized statistics behind `p(η)`.
///
/// For each draw `g ~ N(0, I_n)` with `w = f(g) − μg` this keeps
/// `‖w‖/(b_n σ)` and `|gᵀw|·√n/(b_n² γ)`; `p̂(η)` is the sum of the
/// frequencies with which each exceeds `η`, clipped at one.
#[derive(Clone, Debug)]
pub struct ConcentrationSamples {
    norm_ratio: Vec<f64>,
    corr_ratio: Vec<f64>,
    degenerate: bool,
}

impl ConcentrationSamples {
    pub fn draw(link: &Link, stats: &LinkStats, n: usize, trials: usize, seed: RngSeed) -> Result<Self> {
        if trials == 0 {
            return Err(Error::Domain("concentration probe needs trials >= 1".into()));
        }
        let b_n = gamma_mean_norm(n)?;
        let (sigma, gamma) = (stats.sigma(), stats.gamma());
        let degenerate = sigma == 0.0 && gamma == 0.0;
        if degenerate {
            return Ok(ConcentrationSamples {
                norm_ratio: vec![0.0; trials],
                corr_ratio: vec![0.0; trials],
                degenerate,
            });
        }
        let norm_scale = b_n * sigma;
        let corr_scale = b_n * b_n / (n as f64).sqrt() * gamma;
        let mut norm_ratio = Vec::with_capacity(trials);
        let mut corr_ratio = Vec::with_capacity(trials);
        for trial in 0..trials {
            let mut rng = seed.stream(trial as u64);
            let g = standard_normal_vec(n, &mut rng);
            let mut w_sq = 0.0;
            let mut g_dot_w = 0.0;
            for (i, &gi) in g.iter().enumerate() {
                let fi = link.eval(gi);
                if !fi.is_finite() {
                    return Err(Error::Evaluation { index: i, value: fi });
                }
                let wi = fi - stats.mu * gi;
                w_sq += wi * wi;
                g_dot_w += gi * wi;
            }
            norm_ratio.push(ratio(w_sq.sqrt(), norm_scale));
            corr_ratio.push(ratio(g_dot_w.abs(), corr_scale));
        }
        norm_ratio.sort_by(f64::total_cmp);
        corr_ratio.sort_by(f64::total_cmp);
        Ok(ConcentrationSamples {
            norm_ratio,
            corr_ratio,
            degenerate,
        })
    }

    pub fn trials(&self) -> usize {
        self.norm_ratio.len()
    }

    pub fn estimate(&self, eta: f64) -> ConcentrationEstimate {
        let trials = self.trials();
        let exceed = |sorted: &[f64]| sorted.len() - sorted.partition_point(|&v| v <= eta);
        let p_hat = if self.degenerate {
            0.0
        } else {
            ((exceed(&self.norm_ratio) + exceed(&self.corr_ratio)) as f64 / trials as f64).min(1.0)
        };
        ConcentrationEstimate {
            eta,
            p_hat,
            trials,
            std_error: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
            note: self
                .degenerate
                .then(|| "sigma = gamma = 0: both events have probability zero".to_string()),
        }
    }

    /// Smallest `η` on `grid` whose estimate is at most `budget`.
    pub fn smallest_eta(&self, budget: f64, grid: &[f64]) -> Option<f64> {
        grid.iter()
            .copied()
            .filter(|&eta| eta > 0.0)
            .find(|&eta| self.estimate(eta).p_hat <= budget)
    }
}

fn ratio(value: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        value / scale
    } else if value > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Estimate `p(η)` by sampling, using analytic statistics when
/// available and a `10⁶`-draw Monte Carlo estimate otherwise.
pub fn concentration_probe(
    link: &Link,
    n: usize,
    eta: f64,
    trials: usize,
    seed: RngSeed,
) -> Result<ConcentrationEstimate> {
    let stats = link_stats(link, 1_000_000, seed.derive(0x5747))?;
    concentration_probe_with(link, &stats, n, eta, trials, seed)
}

pub fn concentration_probe_with(
    link: &Link,
    stats: &LinkStats,
    n: usize,
    eta: f64,
    trials: usize,
    seed: RngSeed,
) -> Result<ConcentrationEstimate> {
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("eta must be positive, got {eta}")));
    }
    Ok(ConcentrationSamples::draw(link, stats, n, trials, seed)?.estimate(eta))
}

/// Grid `[lo, hi]` in steps of `step`, used to search for `η`.
pub fn eta_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step).round() as usize;
    (0..=count).map(|k| lo + step * k as f64).collect()
}
