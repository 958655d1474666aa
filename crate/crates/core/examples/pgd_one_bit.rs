//! PGD on one-bit measurements against the noisy linear surrogate and
//! the closed-form error bound.

use shrinkage::bounds::{check_rate_condition, PgdBound};
use shrinkage::gaussian::{sample_design, RngSeed};
use shrinkage::geometry::{default_lambda_grid, minimal_samples, Regularizer};
use shrinkage::links::{link_stats_analytic, Link};
use shrinkage::solvers::{pgd_solve, sparse_unit_vector, Problem, SolverConfig};

fn main() -> shrinkage::Result<()> {
    let (p, s, n) = (500, 5, 1000);
    let theta = sparse_unit_vector(p, s, &mut RngSeed(1).rng())?;
    let x = sample_design(n, p, RngSeed(2))?;
    let stats = link_stats_analytic(&Link::Sign)?;
    let target = &theta * stats.mu;
    let reg = Regularizer::L1Ball { radius: 1.0 }.tuned_to(target.view());
    let n0 = minimal_samples(&reg, target.view(), 0.0, &default_lambda_grid())?.n0;
    let cond = check_rate_condition(n as f64, n0, 1.0)?;
    println!("n0 = {n0:.2}; condition n >= 8 n0 holds: {}", cond.holds);

    let cfg = SolverConfig::with_iters(60);
    let onebit = pgd_solve(&Problem::from_link(x.clone(), theta.clone(), Link::Sign, stats.mu)?, &reg, &cfg)?;
    let linear = pgd_solve(&Problem::noisy_linear(x, theta, stats.mu, stats.sigma(), &mut RngSeed(3).rng())?, &reg, &cfg)?;
    let bound = PgdBound { n: n as f64, n0, kappa: 1.0, eta: 2.0, sigma: stats.sigma(), gamma: stats.gamma(), init_error: stats.mu };
    let curve = bound.curve(61)?;

    println!("{:>4} {:>10} {:>10} {:>10}", "iter", "one-bit", "linear", "bound");
    for t in (0..=60).step_by(6) {
        println!("{t:>4} {:>10.5} {:>10.5} {:>10.5}", onebit.errors()[t], linear.errors()[t], curve.values[t]);
    }
    println!("plateaus: one-bit {:.4}, linear {:.4}", onebit.plateau(10).unwrap(), linear.plateau(10).unwrap());
    Ok(())
}
