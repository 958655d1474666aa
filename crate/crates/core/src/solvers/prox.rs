use std::io::Write;

use ndarray::{Array1, ArrayView1};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{fmt_f64, Problem, Recorder, SolverConfig, SolverTrace};
use crate::error::{Error, Result};
use crate::gaussian::{gamma_mean_norm, sample_design_with, DesignMatrix, RngSeed};
use crate::geometry::{prox_l1, Regularizer};
use crate::links::{apply_link, check_unit_norm, Link, LinkStats};

/// `prox_λ(v) = argmin ½‖v − z‖² + λR(z)`, or any denoiser used in its
/// place. Must be deterministic at fixed `λ`.
pub trait ProxOperator {
    fn prox(&self, v: ArrayView1<f64>, lam: f64) -> Result<Array1<f64>>;
}

impl<F> ProxOperator for F
where
    F: Fn(ArrayView1<f64>, f64) -> Array1<f64>,
{
    fn prox(&self, v: ArrayView1<f64>, lam: f64) -> Result<Array1<f64>> {
        Ok(self(v, lam))
    }
}

/// Penalized forms of the built-in regularizers: soft thresholding for
/// ℓ1, block soft thresholding for ℓ2, and hard thresholding at `√(2λ)`
/// for the count of non-zeros.
impl ProxOperator for Regularizer {
    fn prox(&self, v: ArrayView1<f64>, lam: f64) -> Result<Array1<f64>> {
        let lam = lam.max(0.0);
        match self {
            Regularizer::L1Ball { .. } => Ok(prox_l1(v, lam)),
            Regularizer::L2Ball { .. } => {
                let norm = v.dot(&v).sqrt();
                let scale = if norm > 0.0 { (1.0 - lam / norm).max(0.0) } else { 0.0 };
                Ok(v.mapv(|x| x * scale))
            }
            Regularizer::Sparsity { .. } => {
                let cut = (2.0 * lam).sqrt();
                Ok(v.mapv(|x| if x.abs() > cut { x } else { 0.0 }))
            }
            Regularizer::Custom(c) => Err(Error::Unsupported(format!(
                "custom regularizer {} has no prox; pass a prox operator instead",
                c.name
            ))),
        }
    }
}

/// Tuning of the resampled proximal iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProxSchedule {
    #[serde(rename = "M0")]
    pub m0: f64,
    pub rho: f64,
    pub lambda: f64,
    pub t: f64,
    pub eta: f64,
}

impl ProxSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::Config(format!("rho must lie in (0, 1), got {}", self.rho)));
        }
        if !(self.m0 > 0.0 && self.m0.is_finite()) {
            return Err(Error::Config(format!("M0 must be positive, got {}", self.m0)));
        }
        for (name, v) in [("lambda", self.lambda), ("t", self.t), ("eta", self.eta)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// One step of the shrinkage recursion:
/// `λ_τ = ((1 + t/b_n)M_τ + ησ)λ/b_n` and
/// `M_{τ+1} = ρM_τ + η(σ√n₀(λ) + γ)/√n`.
pub fn lambda_schedule_step(
    m_tau: f64,
    schedule: &ProxSchedule,
    stats: &LinkStats,
    n: usize,
    n0_lambda: f64,
    b_n: f64,
) -> (f64, f64) {
    let (sigma, gamma) = (stats.sigma(), stats.gamma());
    let lambda_tau = ((1.0 + schedule.t / b_n) * m_tau + schedule.eta * sigma) * schedule.lambda / b_n;
    let m_next = schedule.rho * m_tau + schedule.eta * (sigma * n0_lambda.sqrt() + gamma) / (n as f64).sqrt();
    (lambda_tau, m_next)
}

pub struct Minibatch {
    pub x: DesignMatrix,
    pub y: Array1<f64>,
}

/// Supplies a fresh `(X_τ, y_τ)` for every iteration.
pub trait MinibatchSource {
    /// `(n, p)` of every batch.
    fn dims(&self) -> (usize, usize);
    fn next_batch(&mut self) -> Result<Minibatch>;
}

/// Synthetic batches `y = f(Xθ*)` with fresh Gaussian `X`.
pub struct GaussianMinibatches {
    n: usize,
    link: Link,
    theta_star: Array1<f64>,
    rng: ChaCha8Rng,
    remaining: Option<usize>,
}

impl GaussianMinibatches {
    pub fn new(n: usize, link: Link, theta_star: Array1<f64>, seed: RngSeed) -> Result<Self> {
        check_unit_norm(theta_star.view())?;
        if n == 0 {
            return Err(Error::Domain("batch size must be >= 1".into()));
        }
        Ok(GaussianMinibatches {
            n,
            link,
            theta_star,
            rng: seed.rng(),
            remaining: None,
        })
    }

    /// Stop after `batches` draws.
    pub fn with_limit(mut self, batches: usize) -> Self {
        self.remaining = Some(batches);
        self
    }

    pub fn theta_star(&self) -> &Array1<f64> {
        &self.theta_star
    }
}

impl MinibatchSource for GaussianMinibatches {
    fn dims(&self) -> (usize, usize) {
        (self.n, self.theta_star.len())
    }

    fn next_batch(&mut self) -> Result<Minibatch> {
        if let Some(left) = self.remaining.as_mut() {
            if *left == 0 {
                return Err(Error::Resource("minibatch source exhausted".into()));
            }
            *left -= 1;
        }
        let x = sample_design_with(self.n, self.theta_star.len(), &mut self.rng)?;
        let y = apply_link(&self.link, x.data().dot(&self.theta_star).view())?;
        Ok(Minibatch { x, y })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRecord {
    pub iter: usize,
    pub lambda_tau: f64,
    pub m_tau: f64,
}

#[derive(Clone, Debug)]
pub struct ResampledTrace {
    pub trace: SolverTrace,
    pub schedule: Vec<ScheduleRecord>,
}

impl ResampledTrace {
    /// CSV with header `iter,lambda_tau,M_tau`.
    pub fn write_schedule_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iter,lambda_tau,M_tau")?;
        for r in &self.schedule {
            writeln!(out, "{},{},{}", r.iter, fmt_f64(r.lambda_tau), fmt_f64(r.m_tau))?;
        }
        Ok(())
    }
}

/// Proximal gradient with resampling,
/// `θ_{τ+1} = prox_{λ_τ}(θ_τ + α X_τᵀ(y_τ − X_τθ_τ))` with a fresh batch
/// per step and `λ_τ` from [`lambda_schedule_step`].
///
/// `target` is `μθ*` when known. The residual column is measured on the
/// batch used for the step out of `θ_τ`, so the final record has none.
pub fn proxgd_resampled_solve(
    source: &mut dyn MinibatchSource,
    prox: &dyn ProxOperator,
    schedule: &ProxSchedule,
    stats: &LinkStats,
    n0_lambda: f64,
    target: Option<ArrayView1<f64>>,
    config: &SolverConfig,
) -> Result<ResampledTrace> {
    config.validate()?;
    schedule.validate()?;
    let (n, p) = source.dims();
    if let Some(t) = target {
        if t.len() != p {
            return Err(Error::Dimension {
                what: "target",
                expected: p,
                found: t.len(),
            });
        }
    }
    let b_n = gamma_mean_norm(n)?;
    let alpha = config.step(n)?;
    let mut theta = config.initial(p)?;
    let mut rec = Recorder::new(target, config, config.max_iters);
    let mut history = Vec::with_capacity(config.max_iters + 1);
    let mut m = schedule.m0;
    for iter in 0..=config.max_iters {
        let (lambda_tau, m_next) = lambda_schedule_step(m, schedule, stats, n, n0_lambda, b_n);
        history.push(ScheduleRecord {
            iter,
            lambda_tau,
            m_tau: m,
        });
        if iter == config.max_iters {
            rec.observe(iter, theta.view(), || None)?;
            break;
        }
        let batch = source.next_batch()?;
        let x = batch.x.data();
        let resid = &batch.y - &x.dot(&theta);
        let track = config.track_residual;
        rec.observe(iter, theta.view(), || track.then(|| resid.dot(&resid).sqrt()))?;
        let step = &theta + &(x.t().dot(&resid) * alpha);
        theta = prox.prox(step.view(), lambda_tau)?;
        m = m_next;
    }
    Ok(ResampledTrace {
        trace: rec.finish(theta),
        schedule: history,
    })
}

/// Proximal gradient on fixed data with `λ_τ = max(λ₀ρ^τ, λ_min)`:
/// `θ_{τ+1} = prox_{λ_τ}(θ_τ + α Xᵀ(y − Xθ_τ))`.
///
/// `ρ = 1` or `λ_min = λ₀` gives a constant level.
pub fn proxgd_solve(
    problem: &Problem,
    prox: &dyn ProxOperator,
    lambda0: f64,
    rho: f64,
    lambda_min: f64,
    config: &SolverConfig,
) -> Result<SolverTrace> {
    config.validate()?;
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Config(format!("rho must lie in (0, 1], got {rho}")));
    }
    if !(lambda0 >= 0.0 && lambda_min >= 0.0) {
        return Err(Error::Config("lambda0 and lambda_min must be >= 0".into()));
    }
    let x = problem.x().data();
    let y = problem.y();
    let alpha = config.step(problem.n())?;
    let mut theta = config.initial(problem.p())?;
    let target = problem.target();
    let mut rec = Recorder::new(target.as_ref().map(|t| t.view()), config, config.max_iters);
    let mut level = lambda0;
    for iter in 0..=config.max_iters {
        let resid = y - &x.dot(&theta);
        let track = config.track_residual;
        rec.observe(iter, theta.view(), || track.then(|| resid.dot(&resid).sqrt()))?;
        if iter == config.max_iters {
            break;
        }
        let step = &theta + &(x.t().dot(&resid) * alpha);
        theta = prox.prox(step.view(), level.max(lambda_min))?;
        level *= rho;
    }
    Ok(rec.finish(theta))
}
