//! Nonconvex PGD: iterative hard thresholding on sign measurements.

use shrinkage::bounds::PgdBound;
use shrinkage::gaussian::{sample_design, RngSeed};
use shrinkage::geometry::{default_lambda_grid, minimal_samples, Regularizer};
use shrinkage::links::{link_stats_analytic, Link};
use shrinkage::solvers::{pgd_solve, sparse_unit_vector, Problem, SolverConfig};

fn main() -> shrinkage::Result<()> {
    let (p, s, n) = (500, 5, 450);
    let theta = sparse_unit_vector(p, s, &mut RngSeed(4).rng())?;
    let x = sample_design(n, p, RngSeed(5))?;
    let stats = link_stats_analytic(&Link::Sign)?;
    let reg = Regularizer::Sparsity { s };
    let n0 = minimal_samples(&reg, (&theta * stats.mu).view(), 0.0, &default_lambda_grid())?.n0;
    let floor = PgdBound { n: n as f64, n0, kappa: reg.kappa(), eta: 2.0, sigma: stats.sigma(), gamma: stats.gamma(), init_error: stats.mu }
        .floor()?;
    let trace = pgd_solve(&Problem::from_link(x, theta.clone(), Link::Sign, stats.mu)?, &reg, &SolverConfig::with_iters(100))?;
    let est = &trace.theta_hat;
    let found: Vec<usize> = (0..p).filter(|&i| est[i] != 0.0).collect();
    let truth: Vec<usize> = (0..p).filter(|&i| theta[i] != 0.0).collect();
    println!("true support {truth:?}\nestimated    {found:?}");
    println!("plateau {:.4}, floor with kappa = 2: {floor:.4}", trace.plateau(10).unwrap());
    Ok(())
}
