//! Monte Carlo checks of the restricted-eigenvalue and effective-noise
//! ingredients of the PGD guarantee.

use shrinkage::gaussian::RngSeed;
use shrinkage::geometry::{default_lambda_grid, minimal_samples, Regularizer};
use shrinkage::harness::{validate_effective_noise, validate_restricted_eigs};
use shrinkage::links::Link;
use shrinkage::solvers::sparse_unit_vector;

fn main() -> shrinkage::Result<()> {
    let reg = Regularizer::L1Ball { radius: 1.0 };
    let theta = sparse_unit_vector(100, 2, &mut RngSeed(1).rng())?;
    let n0 = minimal_samples(&reg, theta.view(), 0.0, &default_lambda_grid())?.n0;
    for ratio in [1.0, 8.0, 64.0] {
        let n = (ratio * n0).ceil() as usize;
        let r = validate_restricted_eigs(&reg, theta.view(), n, 0.0, 50, RngSeed(2))?;
        println!(
            "n = {n:>5} ({ratio:>2} n0): statistic {:.3} bound {:.3} pass {} {}",
            r.statistic,
            r.bound,
            r.pass,
            r.note.unwrap_or_default()
        );
    }
    let theta = sparse_unit_vector(100, 5, &mut RngSeed(3).rng())?;
    for link in [Link::Sign, Link::Cubic, Link::Linear] {
        let r = validate_effective_noise(&link, &reg, theta.view(), 500, 3.0, 0.0, 100, RngSeed(4))?;
        println!("{:<8} exceedance {:.3} budget {:.3} ({})", link.name(), r.statistic, r.bound, r.note.unwrap_or_default());
    }
    Ok(())
}
