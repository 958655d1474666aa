//! Gaussian widths of descent cones and the minimal sample counts
//! `n₀ = φ⁻¹(ω + t)` and `n₀(λ) = φ⁻¹(G(λ) + 7t + √2)`.
//!
//! For the ℓ1 norm the width is replaced by `min_λ G(λ)` over a grid,
//! since the cone supremum has no tractable closed form.

use std::f64::consts::SQRT_2;

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use super::distance::gaussian_distance_sq;
use super::Regularizer;
use crate::error::{Error, Result};
use crate::gaussian::{gamma_mean_norm, phi_inverse, standard_normal_vec, RngSeed};
use crate::running::Welford;

/// Monte Carlo budget for widths and distances without a closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McBudget {
    pub samples: usize,
    pub seed: RngSeed,
}

impl Default for McBudget {
    fn default() -> Self {
        McBudget {
            samples: 20_000,
            seed: RngSeed(0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WidthMethod {
    /// `min_λ G(λ)` with the closed-form ℓ1 distance.
    AnalyticL1,
    /// Exact value `b_k` of a `k`-dimensional subspace.
    Subspace { dim: usize },
    MonteCarlo { samples: usize, seed: RngSeed },
}

/// Gaussian width `ω(C ∩ B^p)` of the descent cone at a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentConeStats {
    pub width: f64,
    pub std_error: f64,
    pub method: WidthMethod,
    /// Set when the point is zero and the whole space is used as the cone.
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimalSamples {
    pub n0: f64,
    pub t: f64,
    /// The level attaining the minimum, for the penalized form.
    pub lambda: Option<f64>,
    /// `ω` or `G(λ)` that was inverted.
    pub width: f64,
    pub degenerate: bool,
}

impl MinimalSamples {
    /// Smallest integer sample count not below `n0`.
    pub fn ceil(&self) -> usize {
        self.n0.ceil() as usize
    }
}

/// `count` points evenly spaced in log scale over `[lo, hi]`.
pub fn log_spaced_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || count == 0 {
        return Err(Error::Domain(format!("bad log grid [{lo}, {hi}] with {count} points")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect())
}

/// 50 log-spaced levels on `[0.01, 10]`.
pub fn default_lambda_grid() -> Vec<f64> {
    log_spaced_grid(0.01, 10.0, 50).expect("static grid")
}

/// Adds the geometric midpoint between every pair of neighbours, halving
/// the spacing of a log-spaced grid while keeping all original points.
pub fn refine_grid(grid: &[f64]) -> Vec<f64> {
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(2 * sorted.len());
    for w in sorted.windows(2) {
        out.push(w[0]);
        let mid = if w[0] > 0.0 { (w[0] * w[1]).sqrt() } else { 0.5 * (w[0] + w[1]) };
        out.push(mid);
    }
    out.extend(sorted.last());
    out
}

fn nnz(theta: ArrayView1<f64>) -> usize {
    theta.iter().filter(|v| **v != 0.0).count()
}

fn check_t(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("t must be finite and >= 0, got {t}")))
    }
}

fn whole_space(p: usize, degenerate: bool) -> Result<DescentConeStats> {
    Ok(DescentConeStats {
        width: gamma_mean_norm(p)?,
        std_error: 0.0,
        method: WidthMethod::Subspace { dim: p },
        degenerate,
    })
}

/// Width of the tangent cone of `reg` at `theta`, with the grid used by
/// the ℓ1 surrogate.
///
/// * ℓ1 ball: `min_λ G(λ)` over `grid`, capped at `b_p`.
/// * ℓ2 ball: `b_p` at interior points; at the boundary the cone is a
///   half-space and the width is estimated by Monte Carlo.
/// * sparsity: the local cone at an `s`-sparse point with full support is
///   the span of its support (`b_s`); with a smaller support it is the
///   union of `s`-dimensional coordinate subspaces containing it.
pub fn descent_cone_width(
    reg: &Regularizer,
    theta: ArrayView1<f64>,
    grid: &[f64],
    budget: McBudget,
) -> Result<DescentConeStats> {
    let p = theta.len();
    if p == 0 {
        return Err(Error::Domain("empty parameter vector".into()));
    }
    let k = nnz(theta);
    match reg {
        _ if k == 0 && !matches!(reg, Regularizer::Sparsity { .. }) => whole_space(p, true),
        Regularizer::L1Ball { .. } => {
            if grid.is_empty() {
                return Err(Error::Domain("empty lambda grid".into()));
            }
            let mut best = f64::INFINITY;
            for &lam in grid {
                best = best.min(gaussian_distance_sq(reg, theta, lam, 0, budget.seed)?.g_sq);
            }
            Ok(DescentConeStats {
                width: best.sqrt().min(gamma_mean_norm(p)?),
                std_error: 0.0,
                method: WidthMethod::AnalyticL1,
                degenerate: false,
            })
        }
        Regularizer::L2Ball { radius } => {
            let norm = theta.dot(&theta).sqrt();
            if norm < radius * (1.0 - 1e-12) {
                return whole_space(p, false);
            }
            let unit = theta.mapv(|v| v / norm);
            monte_carlo(budget, p, |g| {
                let along = g.dot(&unit).max(0.0);
                (g.dot(g) - along * along).max(0.0).sqrt()
            })
        }
        Regularizer::Sparsity { s } => {
            if k > *s {
                return Err(Error::Precondition(format!(
                    "point has {k} non-zeros, above the sparsity level {s}"
                )));
            }
            let s = (*s).min(p);
            if k == s {
                return Ok(DescentConeStats {
                    width: gamma_mean_norm(s)?,
                    std_error: 0.0,
                    method: WidthMethod::Subspace { dim: s },
                    degenerate: false,
                });
            }
            let (on, off): (Vec<usize>, Vec<usize>) = (0..p).partition(|&i| theta[i] != 0.0);
            monte_carlo(budget, p, |g| {
                let mut tail: Vec<f64> = off.iter().map(|&i| g[i] * g[i]).collect();
                tail.sort_unstable_by(|a, b| b.total_cmp(a));
                let head: f64 = on.iter().map(|&i| g[i] * g[i]).sum();
                (head + tail[..s - k].iter().sum::<f64>()).sqrt()
            })
        }
        Regularizer::Custom(c) => Err(Error::Unsupported(format!(
            "no descent cone width for custom regularizer {}",
            c.name
        ))),
    }
}

fn monte_carlo(
    budget: McBudget,
    p: usize,
    mut sup: impl FnMut(&Array1<f64>) -> f64,
) -> Result<DescentConeStats> {
    if budget.samples < 2 {
        return Err(Error::Domain("Monte Carlo width needs at least 2 samples".into()));
    }
    let mut rng = budget.seed.rng();
    let mut acc = Welford::default();
    for _ in 0..budget.samples {
        let g = Array1::from(standard_normal_vec(p, &mut rng));
        acc.push(sup(&g));
    }
    Ok(DescentConeStats {
        width: acc.mean(),
        std_error: acc.std_error(),
        method: WidthMethod::MonteCarlo {
            samples: budget.samples,
            seed: budget.seed,
        },
        degenerate: false,
    })
}

/// `n₀(λ) = φ⁻¹(G(λ) + 7t + √2)`.
pub fn minimal_samples_regularized(
    reg: &Regularizer,
    theta: ArrayView1<f64>,
    lam: f64,
    t: f64,
) -> Result<MinimalSamples> {
    minimal_samples_regularized_with(reg, theta, lam, t, McBudget::default())
}

pub fn minimal_samples_regularized_with(
    reg: &Regularizer,
    theta: ArrayView1<f64>,
    lam: f64,
    t: f64,
    budget: McBudget,
) -> Result<MinimalSamples> {
    check_t(t)?;
    let d = gaussian_distance_sq(reg, theta, lam, budget.samples, budget.seed)?;
    let width = d.g();
    Ok(MinimalSamples {
        n0: phi_inverse(width + 7.0 * t + SQRT_2)?,
        t,
        lambda: Some(lam),
        width,
        degenerate: false,
    })
}

/// Minimal sample count for the constraint form.
///
/// For the ℓ1 ball this is `min_λ n₀(λ)` over `lambda_grid`, reported with
/// its minimizing level. Other regularizers invert their width directly,
/// `φ⁻¹(ω + t)`. A zero `theta` uses the whole space and sets
/// `degenerate`.
pub fn minimal_samples(
    reg: &Regularizer,
    theta: ArrayView1<f64>,
    t: f64,
    lambda_grid: &[f64],
) -> Result<MinimalSamples> {
    minimal_samples_with(reg, theta, t, lambda_grid, McBudget::default())
}

pub fn minimal_samples_with(
    reg: &Regularizer,
    theta: ArrayView1<f64>,
    t: f64,
    lambda_grid: &[f64],
    budget: McBudget,
) -> Result<MinimalSamples> {
    check_t(t)?;
    if lambda_grid.is_empty() {
        return Err(Error::Domain("empty lambda grid".into()));
    }
    if matches!(reg, Regularizer::L1Ball { .. }) && nnz(theta) > 0 {
        let mut best: Option<MinimalSamples> = None;
        for &lam in lambda_grid {
            let cand = minimal_samples_regularized_with(reg, theta, lam, t, budget)?;
            if best.as_ref().is_none_or(|b| cand.n0 < b.n0) {
                best = Some(cand);
            }
        }
        return Ok(best.expect("non-empty grid"));
    }
    let w = descent_cone_width(reg, theta, lambda_grid, budget)?;
    Ok(MinimalSamples {
        n0: phi_inverse(w.width + t)?,
        t,
        lambda: None,
        width: w.width,
        degenerate: w.degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sparse_theta(p: usize, s: usize) -> Array1<f64> {
        let mut theta = Array1::zeros(p);
        for i in 0..s {
            theta[i] = if i % 2 == 0 { 1.0 } else { -0.5 };
        }
        theta
    }

    #[test]
    fn grid_shape() {
        let g = default_lambda_grid();
        assert_eq!(g.len(), 50);
        assert!((g[0] - 0.01).abs() < 1e-15 && (g[49] - 10.0).abs() < 1e-12);
        let r = refine_grid(&g);
        assert_eq!(r.len(), 99);
        assert!(g.iter().all(|x| r.contains(x)));
    }

    #[test]
    fn l1_regression_constant() {
        // frozen from a 30-digit evaluation over the default grid
        let theta = sparse_theta(500, 10);
        let reg = Regularizer::L1Ball { radius: 1.0 };
        let m = minimal_samples(&reg, theta.view(), 0.0, &default_lambda_grid()).unwrap();
        assert!((m.n0 - 75.9046).abs() < 1e-3, "{m:?}");
        assert!((60.0..=140.0).contains(&m.n0));
        assert!((m.lambda.unwrap() - 1.842).abs() < 0.01);
    }

    #[test]
    fn refinement_never_increases() {
        let theta = sparse_theta(200, 7);
        let reg = Regularizer::L1Ball { radius: 1.0 };
        let mut grid = log_spaced_grid(0.05, 8.0, 6).unwrap();
        let mut last = f64::INFINITY;
        for _ in 0..5 {
            let m = minimal_samples(&reg, theta.view(), 0.2, &grid).unwrap();
            assert!(m.n0 <= last);
            last = m.n0;
            grid = refine_grid(&grid);
        }
    }

    #[test]
    fn zero_level_regularized() {
        let theta = sparse_theta(500, 10);
        let reg = Regularizer::L1Ball { radius: 1.0 };
        let m = minimal_samples_regularized(&reg, theta.view(), 0.0, 0.0).unwrap();
        assert!((m.n0 - 565.745).abs() < 1e-2, "{m:?}");
        let a = minimal_samples_regularized(&reg, theta.view(), 1.0, 0.1).unwrap();
        let b = minimal_samples_regularized(&reg, theta.view(), 1.0, 0.2).unwrap();
        assert!(a.n0 < b.n0);
    }

    #[test]
    fn full_space_cases() {
        let theta = Array1::from(vec![0.1, -0.2, 0.05, 0.0, 0.3]);
        let inside = Regularizer::L2Ball { radius: 10.0 };
        let m = minimal_samples(&inside, theta.view(), 0.0, &[1.0]).unwrap();
        assert!((m.n0 - 5.0).abs() < 1e-9 && !m.degenerate);

        let zero = Array1::zeros(40);
        let m = minimal_samples(&Regularizer::L1Ball { radius: 1.0 }, zero.view(), 0.0, &[1.0]).unwrap();
        assert!((m.n0 - 40.0).abs() < 1e-9 && m.degenerate);
    }

    #[test]
    fn sparsity_widths() {
        let theta = sparse_theta(100, 5);
        let full = descent_cone_width(&Regularizer::Sparsity { s: 5 }, theta.view(), &[], McBudget::default()).unwrap();
        assert!((full.width - gamma_mean_norm(5).unwrap()).abs() < 1e-14);
        let m = minimal_samples(&Regularizer::Sparsity { s: 5 }, theta.view(), 0.0, &[1.0]).unwrap();
        assert!((m.n0 - 5.0).abs() < 1e-9);
        let loose = descent_cone_width(&Regularizer::Sparsity { s: 8 }, theta.view(), &[], McBudget::default()).unwrap();
        assert!(loose.width > gamma_mean_norm(8).unwrap() && loose.width < gamma_mean_norm(100).unwrap());
        assert!(descent_cone_width(&Regularizer::Sparsity { s: 3 }, theta.view(), &[], McBudget::default()).is_err());
    }

    #[test]
    fn boundary_l2_half_space() {
        let theta = Array1::from(vec![0.6, 0.8, 0.0]);
        let w = descent_cone_width(&Regularizer::L2Ball { radius: 1.0 }, theta.view(), &[], McBudget::default()).unwrap();
        let b3 = gamma_mean_norm(3).unwrap();
        let b2 = gamma_mean_norm(2).unwrap();
        assert!(w.width < b3 && w.width > b2);
    }

    #[test]
    fn phase_transition_level_band() {
        let theta = sparse_theta(500, 10);
        let reg = Regularizer::L1Ball { radius: 1.0 };
        let lam = (2.0 * 50f64.ln()).sqrt();
        let m = minimal_samples_regularized(&reg, theta.view(), lam, 0.0).unwrap();
        let target = 20.0 * 50f64.ln() + 20.0;
        assert!((m.n0 / target - 1.0).abs() < 0.25, "{} vs {}", m.n0, target);
        assert!((m.n0 - 117.79).abs() < 0.01);
    }
}
