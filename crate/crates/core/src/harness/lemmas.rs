//! Monte Carlo checks of the two probabilistic ingredients behind the
//! PGD guarantee: restricted eigenvalues of `I − XᵀX/b_n²` over the
//! descent cone, and the size of the projected effective noise
//! `‖P_C(Xᵀw)‖`.

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{gamma_mean_norm, sample_design_with, standard_normal_vec, DesignMatrix, RngSeed};
use crate::geometry::{default_lambda_grid, minimal_samples, L1TangentCone, Regularizer};
use crate::links::{concentration_probe_with, effective_noise, link_stats, Link};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheckReport {
    pub lemma: String,
    /// The empirical quantity compared against `bound`.
    pub statistic: f64,
    pub bound: f64,
    /// `statistic <= bound`.
    pub pass: bool,
    pub trials: usize,
    /// Per-redraw values behind `statistic`.
    pub samples: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Unit vectors in the tangent cone of `reg` at `theta`.
///
/// Supported: the ℓ1 ball (any point), sparsity at a point with exactly
/// `s` non-zeros (the span of its support), and interior points of the ℓ2
/// ball (the whole space).
pub fn cone_directions<R: Rng + ?Sized>(
    reg: &Regularizer,
    theta: ArrayView1<f64>,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Array1<f64>>> {
    let p = theta.len();
    let unit = |v: Array1<f64>| {
        let norm = v.dot(&v).sqrt();
        v / norm
    };
    match reg {
        Regularizer::L1Ball { .. } => Ok(L1TangentCone::at(theta).sample_directions(count, rng)),
        Regularizer::Sparsity { s } if theta.iter().filter(|v| **v != 0.0).count() == *s => {
            let support: Vec<usize> = (0..p).filter(|&i| theta[i] != 0.0).collect();
            Ok((0..count)
                .map(|_| {
                    let mut v = Array1::zeros(p);
                    for (&i, g) in support.iter().zip(standard_normal_vec(support.len(), rng)) {
                        v[i] = g;
                    }
                    unit(v)
                })
                .collect())
        }
        Regularizer::L2Ball { radius } if theta.dot(&theta).sqrt() < *radius => {
            Ok((0..count).map(|_| unit(Array1::from(standard_normal_vec(p, rng)))).collect())
        }
        other => Err(Error::Unsupported(format!("no cone direction sampler for {} at this point", other.name()))),
    }
}

/// `‖P_C(z)‖` for the tangent cone of `reg` at `theta`: exact for the ℓ1
/// ball and for sparsity with full support, otherwise the largest
/// `⟨z, u⟩` over `directions`.
pub fn cone_projection_norm(
    reg: &Regularizer,
    theta: ArrayView1<f64>,
    z: ArrayView1<f64>,
    directions: &[Array1<f64>],
) -> f64 {
    match reg {
        Regularizer::L1Ball { .. } => L1TangentCone::at(theta).projection_norm(z),
        Regularizer::Sparsity { s } if theta.iter().filter(|v| **v != 0.0).count() == *s => theta
            .iter()
            .zip(z.iter())
            .filter(|(t, _)| **t != 0.0)
            .map(|(_, v)| v * v)
            .sum::<f64>()
            .sqrt(),
        _ => directions.iter().map(|u| u.dot(&z)).fold(0.0, f64::max),
    }
}

fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let idx = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    v[idx]
}

/// `max_{i,j} |u_iᵀ(I − XᵀX/b_n²)u_j|` over the given unit directions.
pub fn restricted_eig_statistic(x: &DesignMatrix, directions: &[Array1<f64>]) -> Result<f64> {
    let n = x.rows();
    let b = gamma_mean_norm(n)?;
    let k = directions.len();
    let p = x.cols();
    let mut u = Array2::zeros((p, k));
    for (j, d) in directions.iter().enumerate() {
        u.column_mut(j).assign(d);
    }
    let xu = x.data().dot(&u);
    let gram = xu.t().dot(&xu) / (b * b);
    let inner = u.t().dot(&u);
    Ok((&inner - &gram).iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Restricted eigenvalue check.
///
/// Over `trials` fresh designs, computes the sampled supremum of
/// `|uᵀ(I − XᵀX/b_n²)v|` over cone directions and compares its 0.95
/// quantile with `√(8n₀/n)`; `pass` thus means at least 95% of redraws
/// stayed under the bound. Sampled directions only lower-bound the true
/// supremum.
pub fn validate_restricted_eigs(
    reg: &Regularizer,
    theta: ArrayView1<f64>,
    n: usize,
    t: f64,
    trials: usize,
    seed: RngSeed,
) -> Result<LemmaCheckReport> {
    validate_restricted_eigs_with(reg, theta, n, t, trials, 48, seed)
}

pub fn validate_restricted_eigs_with(
    reg: &Regularizer,
    theta: ArrayView1<f64>,
    n: usize,
    t: f64,
    trials: usize,
    directions: usize,
    seed: RngSeed,
) -> Result<LemmaCheckReport> {
    if trials == 0 || directions == 0 {
        return Err(Error::Domain("need at least one trial and one direction".into()));
    }
    let n0 = minimal_samples(reg, theta, t, &default_lambda_grid())?.n0;
    let bound = (8.0 * n0 / n as f64).sqrt();
    let mut samples = Vec::with_capacity(trials);
    for k in 0..trials {
        let mut rng = seed.stream(k as u64);
        let dirs = cone_directions(reg, theta, directions, &mut rng)?;
        let x = sample_design_with(n, theta.len(), &mut rng)?;
        samples.push(restricted_eig_statistic(&x, &dirs)?);
    }
    let statistic = quantile(&samples, 0.95);
    Ok(LemmaCheckReport {
        lemma: "restricted-eigenvalues".into(),
        statistic,
        bound,
        pass: statistic <= bound,
        trials,
        samples,
        note: (bound >= 1.0).then(|| format!("bound {bound:.3} >= 1 is vacuous at n = {n}, n0 = {n0:.2}")),
    })
}

/// `‖P_C(Xᵀw)‖` for the effective noise `w = f(Xθ) − μXθ` of one design.
pub fn effective_noise_statistic(reg: &Regularizer, theta: ArrayView1<f64>, x: &DesignMatrix, w: ArrayView1<f64>, directions: &[Array1<f64>]) -> f64 {
    let z = x.data().t().dot(&w);
    cone_projection_norm(reg, theta, z.view(), directions)
}

/// Effective noise check.
///
/// Over `trials` designs counts how often `‖P_C(Xᵀw)‖` exceeds
/// `(b_n²/√n)·η(σ√n₀ + γ)`. The exceedance frequency is the statistic;
/// the budget is the probe estimate `p̂(η)` plus 0.10.
#[allow(clippy::too_many_arguments)]
pub fn validate_effective_noise(
    link: &Link,
    reg: &Regularizer,
    theta: ArrayView1<f64>,
    n: usize,
    eta: f64,
    t: f64,
    trials: usize,
    seed: RngSeed,
) -> Result<LemmaCheckReport> {
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    let stats = link_stats(link, 1_000_000, seed.derive(0x5747))?;
    let n0 = minimal_samples(reg, theta, t, &default_lambda_grid())?.n0;
    let b = gamma_mean_norm(n)?;
    let rhs = b * b / (n as f64).sqrt() * eta * (stats.sigma() * n0.sqrt() + stats.gamma());
    let probe = concentration_probe_with(link, &stats, n, eta, 2000, seed.derive(0x5052))?;
    let budget = (probe.p_hat + 0.10).min(1.0);
    let mut samples = Vec::with_capacity(trials);
    let mut exceed = 0usize;
    for k in 0..trials {
        let mut rng = seed.stream(k as u64);
        let x = sample_design_with(n, theta.len(), &mut rng)?;
        let dirs = match reg {
            Regularizer::L1Ball { .. } | Regularizer::Sparsity { .. } => Vec::new(),
            _ => cone_directions(reg, theta, 200, &mut rng)?,
        };
        let w = effective_noise(link, &x, theta, stats.mu)?.w;
        let stat = effective_noise_statistic(reg, theta, &x, w.view(), &dirs);
        if stat > rhs {
            exceed += 1;
        }
        samples.push(stat);
    }
    let freq = exceed as f64 / trials as f64;
    Ok(LemmaCheckReport {
        lemma: "effective-noise".into(),
        statistic: freq,
        bound: budget,
        pass: freq <= budget,
        trials,
        samples,
        note: Some(format!("threshold {rhs:.4}, p_hat({eta}) = {:.4}", probe.p_hat)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::sample_design;

    fn theta(p: usize, s: usize) -> Array1<f64> {
        let mut t = Array1::zeros(p);
        for i in 0..s {
            t[i] = 1.0 / (s as f64).sqrt();
        }
        t
    }

    #[test]
    fn single_direction_statistic() {
        let x = sample_design(4000, 20, RngSeed(1)).unwrap();
        let mut u = Array1::zeros(20);
        u[3] = 1.0;
        let b = gamma_mean_norm(4000).unwrap();
        let xu = x.data().dot(&u);
        let expected = (1.0 - xu.dot(&xu) / (b * b)).abs();
        let got = restricted_eig_statistic(&x, &[u]).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!(got < 0.1);
    }

    #[test]
    fn vacuous_bound_is_flagged() {
        let th = theta(40, 2);
        let reg = Regularizer::L1Ball { radius: 1.0 };
        let n0 = minimal_samples(&reg, th.view(), 0.0, &default_lambda_grid()).unwrap().n0;
        let r = validate_restricted_eigs(&reg, th.view(), n0.ceil() as usize, 0.0, 5, RngSeed(3)).unwrap();
        assert!(r.note.is_some() && r.bound > 1.0);
    }

    #[test]
    fn linear_link_has_no_effective_noise() {
        let th = theta(30, 3);
        let reg = Regularizer::L1Ball { radius: 1.0 };
        let r = validate_effective_noise(&Link::Linear, &reg, th.view(), 60, 1.0, 0.0, 10, RngSeed(2)).unwrap();
        assert!(r.samples.iter().all(|v| *v == 0.0));
        assert!(r.pass);
    }

    #[test]
    fn statistic_is_homogeneous() {
        let th = theta(30, 3);
        let reg = Regularizer::L1Ball { radius: 1.0 };
        let x = sample_design(50, 30, RngSeed(5)).unwrap();
        let w = Array1::from(standard_normal_vec(50, &mut RngSeed(6).rng()));
        let a = effective_noise_statistic(&reg, th.view(), &x, w.view(), &[]);
        let b = effective_noise_statistic(&reg, th.view(), &x, (&w * 2.0).view(), &[]);
        assert!((b - 2.0 * a).abs() < 1e-12 * b.max(1.0));
    }
}
