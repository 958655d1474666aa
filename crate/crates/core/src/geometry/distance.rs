use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use super::Regularizer;
use crate::error::{Error, Result};
use crate::gaussian::{normal_cdf, normal_pdf, standard_normal_vec, RngSeed};
use crate::running::Welford;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistanceMethod {
    AnalyticL1,
    AnalyticL2,
    MonteCarlo { samples: usize, seed: RngSeed },
}

/// `G(λ)² = E dist²(g, λ∂R(θ))` at one level `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianDistance {
    pub lambda: f64,
    pub g_sq: f64,
    /// Zero for closed-form values.
    pub std_error: f64,
    pub method: DistanceMethod,
}

impl GaussianDistance {
    pub fn g(&self) -> f64 {
        self.g_sq.sqrt()
    }
}

/// Exact `dist(g, λ∂‖θ‖₁)`.
pub fn subgradient_distance_l1(g: ArrayView1<f64>, theta: ArrayView1<f64>, lam: f64) -> f64 {
    g.iter()
        .zip(theta.iter())
        .map(|(&gi, &ti)| {
            let r = if ti != 0.0 {
                gi - lam * ti.signum()
            } else {
                (gi.abs() - lam).max(0.0)
            };
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// `dist(g, λ∂‖θ‖₂)`: the point `λθ/‖θ‖` away from the origin, the
/// ball of radius `λ` at it.
fn subgradient_distance_l2(g: ArrayView1<f64>, unit: Option<&Array1<f64>>, lam: f64) -> f64 {
    match unit {
        Some(u) => {
            let d = &g - &(u * lam);
            d.dot(&d).sqrt()
        }
        None => (g.dot(&g).sqrt() - lam).max(0.0),
    }
}

fn check_lambda(lam: f64) -> Result<()> {
    if lam >= 0.0 && lam.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("lambda must be finite and >= 0, got {lam}")))
    }
}

/// Closed form for the ℓ1 norm at a point with `s` non-zeros in `p`
/// coordinates: `s(1+λ²) + (p−s)·2[(1+λ²)Φ(−λ) − λφ(λ)]`.
pub fn gaussian_distance_sq_analytic_l1(s: usize, p: usize, lam: f64) -> Result<GaussianDistance> {
    check_lambda(lam)?;
    if s > p {
        return Err(Error::Precondition(format!("support size {s} exceeds dimension {p}")));
    }
    let l2 = lam * lam;
    let off = if lam == 0.0 {
        1.0
    } else {
        2.0 * ((1.0 + l2) * normal_cdf(-lam) - lam * normal_pdf(lam))
    };
    Ok(GaussianDistance {
        lambda: lam,
        g_sq: (s as f64 * (1.0 + l2) + (p - s) as f64 * off).max(0.0),
        std_error: 0.0,
        method: DistanceMethod::AnalyticL1,
    })
}

/// `G(λ)²` for `reg` at `theta`, in closed form where one exists and by
/// Monte Carlo otherwise (`samples` draws from `seed`).
pub fn gaussian_distance_sq(
    reg: &Regularizer,
    theta: ArrayView1<f64>,
    lam: f64,
    samples: usize,
    seed: RngSeed,
) -> Result<GaussianDistance> {
    check_lambda(lam)?;
    let p = theta.len();
    match reg {
        Regularizer::L1Ball { .. } => {
            let s = theta.iter().filter(|v| **v != 0.0).count();
            gaussian_distance_sq_analytic_l1(s, p, lam)
        }
        Regularizer::L2Ball { .. } if theta.iter().any(|v| *v != 0.0) => Ok(GaussianDistance {
            lambda: lam,
            g_sq: p as f64 + lam * lam,
            std_error: 0.0,
            method: DistanceMethod::AnalyticL2,
        }),
        _ => gaussian_distance_sq_mc(reg, theta, lam, samples, seed),
    }
}

/// Monte Carlo `G(λ)²` from `samples` standard normal vectors.
pub fn gaussian_distance_sq_mc(
    reg: &Regularizer,
    theta: ArrayView1<f64>,
    lam: f64,
    samples: usize,
    seed: RngSeed,
) -> Result<GaussianDistance> {
    Ok(gaussian_distance_sq_mc_grid(reg, theta, &[lam], samples, seed)?[0])
}

/// Monte Carlo `G(λ)²` over several levels, reusing the same draws for
/// every `λ` so differences along the grid carry little noise.
pub fn gaussian_distance_sq_mc_grid(
    reg: &Regularizer,
    theta: ArrayView1<f64>,
    lambdas: &[f64],
    samples: usize,
    seed: RngSeed,
) -> Result<Vec<GaussianDistance>> {
    for &lam in lambdas {
        check_lambda(lam)?;
    }
    if samples < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {samples}")));
    }
    let unit = match reg {
        Regularizer::L1Ball { .. } => None,
        Regularizer::L2Ball { .. } => {
            let norm = theta.dot(&theta).sqrt();
            (norm > 0.0).then(|| theta.mapv(|v| v / norm))
        }
        other => {
            return Err(Error::Unsupported(format!(
                "no subdifferential distance oracle for {}",
                other.name()
            )))
        }
    };
    let mut acc = vec![Welford::default(); lambdas.len()];
    let mut rng = seed.rng();
    for _ in 0..samples {
        let g = Array1::from(standard_normal_vec(theta.len(), &mut rng));
        for (w, &lam) in acc.iter_mut().zip(lambdas) {
            let d = match reg {
                Regularizer::L1Ball { .. } => subgradient_distance_l1(g.view(), theta, lam),
                _ => subgradient_distance_l2(g.view(), unit.as_ref(), lam),
            };
            w.push(d * d);
        }
    }
    Ok(acc
        .iter()
        .zip(lambdas)
        .map(|(w, &lam)| GaussianDistance {
            lambda: lam,
            g_sq: w.mean(),
            std_error: w.std_error(),
            method: DistanceMethod::MonteCarlo { samples, seed },
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn distance_examples() {
        let theta = array![1.0, 0.0];
        assert_eq!(subgradient_distance_l1(array![3.0, 0.5].view(), theta.view(), 2.0), 1.0);
        assert_eq!(subgradient_distance_l1(array![2.0, 3.0].view(), theta.view(), 2.0), 1.0);
        let g = array![0.3, -1.2];
        assert!((subgradient_distance_l1(g.view(), theta.view(), 0.0) - g.dot(&g).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn analytic_l1_values() {
        // mpmath reference
        let d = gaussian_distance_sq_analytic_l1(1, 2, 1.0).unwrap();
        assert!((d.g_sq - 2.150_679_566_687_541_5).abs() < 1e-12, "{}", d.g_sq);
        assert_eq!(gaussian_distance_sq_analytic_l1(10, 500, 0.0).unwrap().g_sq, 500.0);
        assert!(gaussian_distance_sq_analytic_l1(1, 2, -0.1).is_err());
    }

    #[test]
    fn analytic_l1_is_continuous_at_zero() {
        let at0 = gaussian_distance_sq_analytic_l1(3, 40, 0.0).unwrap().g_sq;
        let near = gaussian_distance_sq_analytic_l1(3, 40, 1e-9).unwrap().g_sq;
        assert!((at0 - near).abs() < 1e-6);
    }

    #[test]
    fn zero_level_is_dimension() {
        let theta = array![0.0, 2.0, 0.0, 0.0];
        for reg in [Regularizer::L1Ball { radius: 2.0 }, Regularizer::L2Ball { radius: 2.0 }] {
            let d = gaussian_distance_sq(&reg, theta.view(), 0.0, 100, RngSeed(1)).unwrap();
            assert_eq!(d.g_sq, 4.0);
        }
    }

    #[test]
    fn analytic_matches_mc() {
        let mut theta = Array1::zeros(500);
        for i in 0..10 {
            theta[i] = if i % 2 == 0 { 1.0 } else { -1.0 };
        }
        let reg = Regularizer::L1Ball { radius: 10.0 };
        let exact = gaussian_distance_sq(&reg, theta.view(), 2.0, 0, RngSeed(0)).unwrap();
        let mc = gaussian_distance_sq_mc(&reg, theta.view(), 2.0, 100_000, RngSeed(2)).unwrap();
        assert!((exact.g_sq - mc.g_sq).abs() < 3.0 * mc.std_error, "{exact:?} {mc:?}");
    }

    #[test]
    fn l2_at_origin_uses_mc() {
        let reg = Regularizer::L2Ball { radius: 1.0 };
        let d = gaussian_distance_sq(&reg, Array1::zeros(3).view(), 1.0, 20_000, RngSeed(4)).unwrap();
        assert!(matches!(d.method, DistanceMethod::MonteCarlo { .. }));
        assert!(d.g_sq < 3.0 && d.g_sq > 0.5);
        assert!(gaussian_distance_sq(&Regularizer::Sparsity { s: 2 }, Array1::zeros(3).view(), 1.0, 100, RngSeed(0)).is_err());
    }
}
