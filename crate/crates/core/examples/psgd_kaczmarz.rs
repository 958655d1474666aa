//! PSGD (projected randomized Kaczmarz): noiseless convergence and the
//! averaged squared error under one-bit data against its bound.

use shrinkage::bounds::PsgdBound;
use shrinkage::gaussian::{sample_design, RngSeed};
use shrinkage::geometry::{default_lambda_grid, minimal_samples, Regularizer};
use shrinkage::links::{link_stats_analytic, Link};
use shrinkage::solvers::{psgd_solve, sparse_unit_vector, Problem, RowSampler, SolverConfig};

fn main() -> shrinkage::Result<()> {
    let (p, s, n) = (100, 10, 400);
    let theta = sparse_unit_vector(p, s, &mut RngSeed(1).rng())?;
    let x = sample_design(n, p, RngSeed(2))?;
    let probs = RowSampler::new(x.data())?.probabilities();
    println!("row probabilities range {:.5}..{:.5}", probs.iter().cloned().fold(1.0, f64::min), probs.iter().cloned().fold(0.0, f64::max));

    let reg = Regularizer::L1Ball { radius: theta.mapv(f64::abs).sum() };
    let clean = Problem::from_link(x.clone(), theta.clone(), Link::Linear, 1.0)?;
    let cfg = SolverConfig { record_every: 1000, track_residual: false, ..SolverConfig::with_iters(8000) };
    let run = psgd_solve(&clean, &reg, &cfg)?;
    println!("noiseless: error after {} steps {:.2e}", cfg.max_iters, run.mean_trace().final_error().unwrap());

    let stats = link_stats_analytic(&Link::Sign)?;
    let target = &theta * stats.mu;
    let reg = reg.tuned_to(target.view());
    let n0 = minimal_samples(&reg, target.view(), 0.0, &default_lambda_grid())?.n0;
    let noisy = Problem::from_link(x, theta, Link::Sign, stats.mu)?;
    let cfg = SolverConfig { trials: 20, record_every: 500, track_residual: false, ..SolverConfig::with_iters(4000) };
    let run = psgd_solve(&noisy, &reg, &cfg)?;
    let bound = PsgdBound { n: n as f64, n0, p: p as f64, eta: 2.0, sigma: stats.sigma(), init_error_sq: stats.mu.powi(2) };
    println!("{:>6} {:>10} {:>10}", "iter", "mse", "bound");
    for (it, mse) in run.iters.iter().zip(run.mean_sq_error.as_ref().unwrap()) {
        println!("{it:>6} {mse:>10.5} {:>10.5}", bound.at(*it)?);
    }
    Ok(())
}
