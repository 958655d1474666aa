//! Iterative estimators for the single-index model.
//!
//! * [`pgd_solve`]: projected gradient descent onto `K = {R(θ) ≤ R}`.
//! * [`psgd_solve`]: projected randomized Kaczmarz steps, one row at a time.
//! * [`proxgd_resampled_solve`]: proximal steps on a fresh design per
//!   iteration with the `(λ_τ, M_τ)` schedule.
//! * [`proxgd_solve`]: proximal steps on fixed data with `λ_τ = max(λ₀ρ^τ, λ_min)`.
//!
//! All of them start from `θ₀ = 0` unless configured and record
//! `‖θ_τ − μθ*‖` when the problem carries an oracle.

mod pgd;
mod problem;
mod prox;
mod psgd;
mod trace;

use std::time::Instant;

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{gamma_mean_norm, RngSeed};

pub use pgd::pgd_solve;
pub use problem::{sparse_unit_vector, Problem};
pub use prox::{
    lambda_schedule_step, proxgd_resampled_solve, proxgd_solve, GaussianMinibatches, Minibatch,
    MinibatchSource, ProxOperator, ProxSchedule, ResampledTrace, ScheduleRecord,
};
pub use psgd::{psgd_solve, PsgdTrace, RowSampler};
pub use trace::{mean_trace, plateau, SolverTrace, TraceRecord};

pub(crate) use trace::fmt_f64;

/// Abort once the tracked error exceeds this multiple of its initial value.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Gradient step; `None` means `1/b_n²`.
    pub step_size: Option<f64>,
    pub seed: RngSeed,
    /// Independent chains averaged by PSGD.
    pub trials: usize,
    /// Stop when `‖θ_{τ+1} − θ_τ‖ < stop_tol`; zero disables it.
    pub stop_tol: f64,
    pub theta0: Option<Vec<f64>>,
    /// Lets PSGD run with a nonconvex regularizer.
    pub allow_nonconvex: bool,
    /// Keep every `record_every`-th iterate in the trace (the last one is
    /// always kept).
    pub record_every: usize,
    pub track_residual: bool,
    pub record_wall_time: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 200,
            step_size: None,
            seed: RngSeed(0),
            trials: 1,
            stop_tol: 0.0,
            theta0: None,
            allow_nonconvex: false,
            record_every: 1,
            track_residual: true,
            record_wall_time: false,
        }
    }
}

impl SolverConfig {
    pub fn with_iters(max_iters: usize) -> Self {
        SolverConfig {
            max_iters,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.step_size {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Config(format!("step_size must be positive, got {a}")));
            }
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if !(self.stop_tol >= 0.0) {
            return Err(Error::Config(format!("stop_tol must be >= 0, got {}", self.stop_tol)));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be >= 1".into()));
        }
        Ok(())
    }

    /// The configured step, or `1/b_n²`.
    pub fn step(&self, n: usize) -> Result<f64> {
        match self.step_size {
            Some(a) => Ok(a),
            None => {
                let b = gamma_mean_norm(n)?;
                Ok(1.0 / (b * b))
            }
        }
    }

    pub fn initial(&self, p: usize) -> Result<Array1<f64>> {
        match &self.theta0 {
            None => Ok(Array1::zeros(p)),
            Some(v) if v.len() == p => Ok(Array1::from(v.clone())),
            Some(v) => Err(Error::Dimension {
                what: "theta0",
                expected: p,
                found: v.len(),
            }),
        }
    }
}

/// Collects trace records and enforces the divergence guard.
pub(crate) struct Recorder<'a> {
    target: Option<ArrayView1<'a, f64>>,
    clock: Option<Instant>,
    every: usize,
    last: usize,
    records: Vec<TraceRecord>,
    reference: Option<f64>,
}

impl<'a> Recorder<'a> {
    pub(crate) fn new(target: Option<ArrayView1<'a, f64>>, config: &SolverConfig, last: usize) -> Self {
        Recorder {
            target,
            clock: config.record_wall_time.then(Instant::now),
            every: config.record_every.max(1),
            last,
            records: Vec::new(),
            reference: None,
        }
    }

    pub(crate) fn wants(&self, iter: usize) -> bool {
        iter % self.every == 0 || iter == self.last
    }

    /// Checks the iterate and records it if `iter` is on the schedule.
    /// `residual` is only evaluated for recorded iterations.
    pub(crate) fn observe(
        &mut self,
        iter: usize,
        theta: ArrayView1<f64>,
        residual: impl FnOnce() -> Option<f64>,
    ) -> Result<()> {
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                iter,
                reason: "non-finite iterate".into(),
            });
        }
        let error = self.target.map(|t| problem::distance(theta, t));
        let wanted = self.wants(iter);
        let residual = if wanted { residual() } else { None };
        let tracked = error.or(residual);
        if let Some(e) = tracked {
            match self.reference {
                None => self.reference = Some(e),
                Some(r) if r > 0.0 && e > DIVERGENCE_FACTOR * r => {
                    return Err(Error::Divergence {
                        iter,
                        reason: format!("error {e:.3e} exceeds {DIVERGENCE_FACTOR:e} x initial {r:.3e}"),
                    })
                }
                _ => {}
            }
        }
        if wanted {
            let wall_ms = self.clock.map_or(0.0, |c| c.elapsed().as_secs_f64() * 1e3);
            self.records.push(TraceRecord {
                iter,
                error,
                residual,
                wall_ms,
            });
        }
        Ok(())
    }

    pub(crate) fn finish(self, theta_hat: Array1<f64>) -> SolverTrace {
        SolverTrace {
            records: self.records,
            theta_hat,
        }
    }
}
