//! Proximal gradient on fresh minibatches with the shrinkage schedule
//! λ_τ, M_τ, compared with the closed-form bound on M_τ.

use shrinkage::bounds::ProxMBound;
use shrinkage::gaussian::RngSeed;
use shrinkage::geometry::{minimal_samples_regularized, Regularizer};
use shrinkage::links::{link_stats_analytic, Link};
use shrinkage::solvers::{proxgd_resampled_solve, sparse_unit_vector, GaussianMinibatches, ProxSchedule, SolverConfig};

fn main() -> shrinkage::Result<()> {
    let (p, s, n) = (400, 5, 300);
    let theta = sparse_unit_vector(p, s, &mut RngSeed(1).rng())?;
    let stats = link_stats_analytic(&Link::Sign)?;
    let target = &theta * stats.mu;
    let reg = Regularizer::L1Ball { radius: 1.0 };
    let schedule = ProxSchedule { m0: 1.0, rho: 0.6, lambda: 2.0, t: 0.0, eta: 1.0 };
    let n0 = minimal_samples_regularized(&reg, target.view(), schedule.lambda, schedule.t)?.n0;

    let mut batches = GaussianMinibatches::new(n, Link::Sign, theta, RngSeed(2))?.with_limit(30);
    let out = proxgd_resampled_solve(&mut batches, &reg, &schedule, &stats, n0, Some(target.view()), &SolverConfig::with_iters(30))?;
    let bound = ProxMBound { m0: 1.0, rho: 0.6, eta: 1.0, sigma: stats.sigma(), gamma: stats.gamma(), n: n as f64, n0_lambda: n0 };

    println!("n0(lambda = 2) = {n0:.2}");
    println!("{:>4} {:>9} {:>9} {:>9} {:>12}", "iter", "error", "lambda", "M", "geom. bound");
    for (rec, sch) in out.trace.records.iter().zip(&out.schedule).step_by(3) {
        println!(
            "{:>4} {:>9.4} {:>9.4} {:>9.4} {:>12.4}",
            rec.iter,
            rec.error.unwrap(),
            sch.lambda_tau,
            sch.m_tau,
            bound.geometric_at(rec.iter)?
        );
    }
    out.write_schedule_csv(std::io::stdout().lock())?;
    Ok(())
}
