use ndarray::{Array1, ArrayView1};
use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gaussian::{standard_normal_vec, DesignMatrix};
use crate::links::{apply_link, check_unit_norm, Link};

/// Observations `y` with their design, plus the oracle quantities of a
/// synthetic instance.
#[derive(Clone, Debug)]
pub struct Problem {
    x: DesignMatrix,
    y: Array1<f64>,
    link: Link,
    theta_star: Option<Array1<f64>>,
    mu: f64,
}

impl Problem {
    pub fn new(x: DesignMatrix, y: Array1<f64>, link: Link, theta_star: Option<Array1<f64>>, mu: f64) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::Dimension {
                what: "observations",
                expected: x.rows(),
                found: y.len(),
            });
        }
        if let Some(t) = &theta_star {
            if t.len() != x.cols() {
                return Err(Error::Dimension {
                    what: "theta_star",
                    expected: x.cols(),
                    found: t.len(),
                });
            }
            check_unit_norm(t.view())?;
        }
        if !mu.is_finite() {
            return Err(Error::Domain(format!("mu must be finite, got {mu}")));
        }
        Ok(Problem { x, y, link, theta_star, mu })
    }

    /// `y = f(Xθ*)`.
    pub fn from_link(x: DesignMatrix, theta_star: Array1<f64>, link: Link, mu: f64) -> Result<Self> {
        if theta_star.len() != x.cols() {
            return Err(Error::Dimension {
                what: "theta_star",
                expected: x.cols(),
                found: theta_star.len(),
            });
        }
        let y = apply_link(&link, x.data().dot(&theta_star).view())?;
        Problem::new(x, y, link, Some(theta_star), mu)
    }

    /// The linear surrogate `y = μXθ* + w` with `w ~ N(0, σ²I)`.
    pub fn noisy_linear<R: Rng + ?Sized>(
        x: DesignMatrix,
        theta_star: Array1<f64>,
        mu: f64,
        sigma: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if theta_star.len() != x.cols() {
            return Err(Error::Dimension {
                what: "theta_star",
                expected: x.cols(),
                found: theta_star.len(),
            });
        }
        let w = Array1::from(standard_normal_vec(x.rows(), rng));
        let y = x.data().dot(&theta_star) * mu + w * sigma;
        Problem::new(x, y, Link::Linear, Some(theta_star), mu)
    }

    pub fn x(&self) -> &DesignMatrix {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn link(&self) -> &Link {
        &self.link
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn theta_star(&self) -> Option<&Array1<f64>> {
        self.theta_star.as_ref()
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    /// `μθ*`, the point the estimates approach.
    pub fn target(&self) -> Option<Array1<f64>> {
        self.theta_star.as_ref().map(|t| t * self.mu)
    }
}

/// A unit vector with `s` non-zeros on a uniformly random support and
/// Gaussian magnitudes.
pub fn sparse_unit_vector<R: Rng + ?Sized>(p: usize, s: usize, rng: &mut R) -> Result<Array1<f64>> {
    if s == 0 || s > p {
        return Err(Error::Domain(format!("need 1 <= s <= p, got s={s}, p={p}")));
    }
    let mut support = index::sample(rng, p, s).into_vec();
    support.sort_unstable();
    let values = loop {
        let v = standard_normal_vec(s, rng);
        if v.iter().all(|x| *x != 0.0) {
            break v;
        }
    };
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut theta = Array1::zeros(p);
    for (&i, v) in support.iter().zip(values) {
        theta[i] = v / norm;
    }
    Ok(theta)
}

pub(crate) fn distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{sample_design, RngSeed};

    #[test]
    fn sparse_vector_shape() {
        let mut rng = RngSeed(5).rng();
        let t = sparse_unit_vector(50, 4, &mut rng).unwrap();
        assert_eq!(t.iter().filter(|v| **v != 0.0).count(), 4);
        assert!((t.dot(&t) - 1.0).abs() < 1e-12);
        assert!(sparse_unit_vector(3, 4, &mut rng).is_err());
    }

    #[test]
    fn construction_checks() {
        let x = sample_design(6, 3, RngSeed(1)).unwrap();
        let theta = Array1::from(vec![1.0, 0.0, 0.0]);
        let prob = Problem::from_link(x.clone(), theta.clone(), Link::Sign, 0.8).unwrap();
        assert!(prob.y().iter().all(|v| v.abs() == 1.0));
        assert_eq!(prob.target().unwrap()[0], 0.8);
        assert!(Problem::new(x.clone(), Array1::zeros(5), Link::Linear, None, 1.0).is_err());
        assert!(Problem::from_link(x, theta * 2.0, Link::Linear, 1.0).is_err());
    }
}
