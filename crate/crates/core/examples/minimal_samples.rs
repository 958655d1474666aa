//! Sample-complexity calculus: Gaussian distance curve of the ℓ1 norm,
//! the minimal sample count n0 and its dependence on sparsity.

use shrinkage::gaussian::{phi, RngSeed};
use shrinkage::geometry::{
    default_lambda_grid, descent_cone_width, gaussian_distance_sq, gaussian_distance_sq_analytic_l1, log_spaced_grid,
    minimal_samples, McBudget, Regularizer,
};
use shrinkage::solvers::sparse_unit_vector;

fn main() -> shrinkage::Result<()> {
    let p = 500;
    let l1 = Regularizer::L1Ball { radius: 1.0 };
    let theta = sparse_unit_vector(p, 10, &mut RngSeed(0).rng())?;

    println!("lambda       G(lambda)^2   MC check");
    for lam in log_spaced_grid(0.25, 4.0, 5)? {
        let exact = gaussian_distance_sq_analytic_l1(10, p, lam)?;
        let mc = shrinkage::geometry::gaussian_distance_sq_mc(&l1, theta.view(), lam, 20_000, RngSeed(1))?;
        println!("{lam:<12.4} {:<13.4} {:.4} +- {:.4}", exact.g_sq, mc.g_sq, mc.std_error);
    }

    let m = minimal_samples(&l1, theta.view(), 0.0, &default_lambda_grid())?;
    println!("\nl1, s = 10, p = 500: n0 = {:.4} at lambda = {:.4}", m.n0, m.lambda.unwrap());
    for s in [1, 5, 20, 50] {
        let th = sparse_unit_vector(p, s, &mut RngSeed(s as u64).rng())?;
        let m = minimal_samples(&l1, th.view(), 0.0, &default_lambda_grid())?;
        println!("  s = {s:<3} n0 = {:8.3}", m.n0);
    }

    let sparse = Regularizer::Sparsity { s: 10 };
    let w = descent_cone_width(&sparse, theta.view(), &default_lambda_grid(), McBudget::default())?;
    println!("\nsparsity(10) cone width {:.4} (b_10 = {:.4})", w.width, phi(10.0));

    let l2 = Regularizer::L2Ball { radius: 1.0 };
    let g = gaussian_distance_sq(&l2, theta.view(), 1.0, 10_000, RngSeed(4))?;
    println!("l2 norm at a unit vector: G(1)^2 = {} (= p + 1)", g.g_sq);
    Ok(())
}
