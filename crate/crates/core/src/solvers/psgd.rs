use ndarray::{Array1, Array2};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::trace::mean_trace;
use super::{Problem, Recorder, SolverConfig, SolverTrace};
use crate::error::{Error, Result};
use crate::geometry::Regularizer;

/// Draws row `i` with probability `‖x_i‖²/‖X‖_F²`. Rows of zero norm
/// have zero weight and are never drawn.
#[derive(Clone, Debug)]
pub struct RowSampler {
    norms_sq: Vec<f64>,
    dist: WeightedIndex<f64>,
}

impl RowSampler {
    pub fn new(x: &Array2<f64>) -> Result<Self> {
        let norms_sq: Vec<f64> = x.rows().into_iter().map(|r| r.dot(&r)).collect();
        let dist = WeightedIndex::new(&norms_sq)
            .map_err(|e| Error::Precondition(format!("cannot sample rows: {e}")))?;
        Ok(RowSampler { norms_sq, dist })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.dist.sample(rng)
    }

    pub fn norm_sq(&self, i: usize) -> f64 {
        self.norms_sq[i]
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let total: f64 = self.norms_sq.iter().sum();
        self.norms_sq.iter().map(|w| w / total).collect()
    }
}

/// PSGD output: one trace per chain, all on the same data, and their
/// average squared error at each recorded iteration.
#[derive(Clone, Debug)]
pub struct PsgdTrace {
    pub trials: Vec<SolverTrace>,
    pub iters: Vec<usize>,
    /// `mean_k ‖θ_τ^(k) − μθ*‖²`, present with an oracle.
    pub mean_sq_error: Option<Vec<f64>>,
}

impl PsgdTrace {
    /// Cross-chain average in the common trace layout, with the error
    /// column holding the root of the mean squared error.
    pub fn mean_trace(&self) -> SolverTrace {
        let mut m = mean_trace(&self.trials).expect("at least one trial");
        if let Some(mse) = &self.mean_sq_error {
            for (r, e) in m.records.iter_mut().zip(mse) {
                r.error = Some(e.sqrt());
            }
        }
        m
    }
}

/// Projected stochastic gradient descent
/// `θ_{τ+1} = P_K(θ_τ + (y_ψ − ⟨x_ψ, θ_τ⟩)/‖x_ψ‖² · x_ψ)` with `ψ` drawn
/// by [`RowSampler`].
///
/// Runs `config.trials` chains with independent index streams
/// `config.seed.stream(k)`. Nonconvex regularizers are refused unless
/// `allow_nonconvex` is set.
pub fn psgd_solve(problem: &Problem, reg: &Regularizer, config: &SolverConfig) -> Result<PsgdTrace> {
    config.validate()?;
    reg.validate()?;
    if !reg.is_convex() && !config.allow_nonconvex {
        return Err(Error::Precondition(format!(
            "PSGD needs a convex regularizer, got {}; set allow_nonconvex to override",
            reg.name()
        )));
    }
    let x = problem.x().data();
    let y = problem.y();
    let sampler = RowSampler::new(x)?;
    let target = problem.target();
    let theta0 = config.initial(problem.p())?;

    let mut trials = Vec::with_capacity(config.trials);
    for k in 0..config.trials {
        let mut rng = config.seed.stream(k as u64);
        let mut rec = Recorder::new(target.as_ref().map(|t| t.view()), config, config.max_iters);
        let mut theta = theta0.clone();
        let residual = |theta: &Array1<f64>| {
            config.track_residual.then(|| {
                let r = y - &x.dot(theta);
                r.dot(&r).sqrt()
            })
        };
        for iter in 0..=config.max_iters {
            rec.observe(iter, theta.view(), || residual(&theta))?;
            if iter == config.max_iters {
                break;
            }
            let i = sampler.sample(&mut rng);
            let row = x.row(i);
            let coef = (y[i] - row.dot(&theta)) / sampler.norm_sq(i);
            theta.scaled_add(coef, &row);
            theta = reg.project(theta.view());
        }
        trials.push(rec.finish(theta));
    }

    let iters = trials[0].iters();
    let mean_sq_error = target.as_ref().map(|_| {
        (0..iters.len())
            .map(|j| {
                trials.iter().map(|t| t.records[j].error.unwrap().powi(2)).sum::<f64>() / trials.len() as f64
            })
            .collect()
    });
    Ok(PsgdTrace {
        trials,
        iters,
        mean_sq_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{sample_design, RngSeed};
    use crate::links::Link;
    use crate::solvers::sparse_unit_vector;

    #[test]
    fn sampler_frequencies() {
        let x = sample_design(8, 3, RngSeed(2)).unwrap();
        let s = RowSampler::new(x.data()).unwrap();
        let probs = s.probabilities();
        let draws = 1_000_000;
        let mut counts = vec![0usize; 8];
        let mut rng = RngSeed(9).rng();
        for _ in 0..draws {
            counts[s.sample(&mut rng)] += 1;
        }
        for (c, p) in counts.iter().zip(&probs) {
            let expected = p * draws as f64;
            let sd = (draws as f64 * p * (1.0 - p)).sqrt();
            assert!((*c as f64 - expected).abs() < 3.0 * sd, "{c} vs {expected}");
        }
    }

    #[test]
    fn zero_rows_are_skipped() {
        let mut x = sample_design(4, 2, RngSeed(2)).unwrap().into_inner();
        x.row_mut(1).fill(0.0);
        let s = RowSampler::new(&x).unwrap();
        let mut rng = RngSeed(1).rng();
        assert!((0..10_000).all(|_| s.sample(&mut rng) != 1));
        assert!(RowSampler::new(&Array2::zeros((3, 2))).is_err());
    }

    #[test]
    fn kaczmarz_converges_on_consistent_system() {
        let p = 40;
        let theta = sparse_unit_vector(p, 4, &mut RngSeed(3).rng()).unwrap();
        let x = sample_design(4 * p, p, RngSeed(4)).unwrap();
        let prob = Problem::from_link(x, theta.clone(), Link::Linear, 1.0).unwrap();
        let reg = Regularizer::L1Ball { radius: 0.0 }.tuned_to(theta.view());
        let config = SolverConfig {
            max_iters: 5000,
            record_every: 100,
            ..Default::default()
        };
        let out = psgd_solve(&prob, &reg, &config).unwrap();
        assert!(out.trials[0].final_error().unwrap() < 1e-6);
        assert_eq!(*out.iters.last().unwrap(), 5000);
    }

    #[test]
    fn nonconvex_needs_override() {
        let x = sample_design(10, 5, RngSeed(4)).unwrap();
        let theta = sparse_unit_vector(5, 1, &mut RngSeed(1).rng()).unwrap();
        let prob = Problem::from_link(x, theta, Link::Linear, 1.0).unwrap();
        let reg = Regularizer::Sparsity { s: 1 };
        assert!(psgd_solve(&prob, &reg, &SolverConfig::with_iters(5)).is_err());
        let ok = SolverConfig {
            max_iters: 5,
            allow_nonconvex: true,
            ..Default::default()
        };
        assert!(psgd_solve(&prob, &reg, &ok).is_ok());
    }

    #[test]
    fn chains_are_deterministic() {
        let x = sample_design(30, 10, RngSeed(4)).unwrap();
        let theta = sparse_unit_vector(10, 2, &mut RngSeed(1).rng()).unwrap();
        let prob = Problem::from_link(x, theta, Link::Sign, 0.79).unwrap();
        let config = SolverConfig {
            max_iters: 50,
            trials: 3,
            ..Default::default()
        };
        let reg = Regularizer::L1Ball { radius: 1.0 };
        let a = psgd_solve(&prob, &reg, &config).unwrap();
        let b = psgd_solve(&prob, &reg, &config).unwrap();
        assert_eq!(a.mean_sq_error, b.mean_sq_error);
        assert_ne!(a.trials[0].records, a.trials[1].records);
    }
}
