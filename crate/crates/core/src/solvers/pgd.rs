use super::problem::distance;
use super::{Problem, Recorder, SolverConfig, SolverTrace};
use crate::error::Result;
use crate::geometry::Regularizer;

/// Projected gradient descent `θ_{τ+1} = P_K(θ_τ + α Xᵀ(y − Xθ_τ))`.
///
/// Records `θ₀, …, θ_T` where `T = max_iters` unless `stop_tol` triggers
/// first. Each iteration costs one product with `X` and one with `Xᵀ`.
pub fn pgd_solve(problem: &Problem, reg: &Regularizer, config: &SolverConfig) -> Result<SolverTrace> {
    config.validate()?;
    reg.validate()?;
    let x = problem.x().data();
    let y = problem.y();
    let alpha = config.step(problem.n())?;
    let mut theta = config.initial(problem.p())?;
    let target = problem.target();
    let mut rec = Recorder::new(target.as_ref().map(|t| t.view()), config, config.max_iters);

    let mut fitted = x.dot(&theta);
    for iter in 0..=config.max_iters {
        let resid = y - &fitted;
        let track = config.track_residual;
        rec.observe(iter, theta.view(), || track.then(|| resid.dot(&resid).sqrt()))?;
        if iter == config.max_iters {
            break;
        }
        let step = &theta + &(x.t().dot(&resid) * alpha);
        let next = reg.project(step.view());
        let moved = distance(next.view(), theta.view());
        theta = next;
        fitted = x.dot(&theta);
        if config.stop_tol > 0.0 && moved < config.stop_tol {
            let resid = y - &fitted;
            rec.last = iter + 1;
            rec.observe(iter + 1, theta.view(), || track.then(|| resid.dot(&resid).sqrt()))?;
            break;
        }
    }
    Ok(rec.finish(theta))
}
