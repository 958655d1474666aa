//! Closed-form error guarantees to overlay on solver traces.
//!
//! * [`PgdBound`]: `r^τ‖θ₀ − μθ*‖ + κ/(1 − r)·η(σ√n₀ + γ)/√n` with
//!   `r = √(8κ²n₀/n)`.
//! * [`PsgdBound`]: `(1 − (1 − √(n₀/n))²/(2p))^τ‖θ₀ − μθ*‖² + 1.01/(1 − √(n₀/n))²·η²σ²`,
//!   a bound on the mean squared error.
//! * [`ProxMBound`]: `ρ^τM₀ + η(σ√n₀(λ) + γ)/√n` for the shrinkage
//!   recursion.
//!
//! `n₀` stays real-valued throughout.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Regularizer;
use crate::solvers::fmt_f64;

/// 1 for convex regularizers, 2 otherwise.
pub fn kappa(reg: &Regularizer) -> f64 {
    reg.kappa()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCondition {
    pub holds: bool,
    /// `n/(8κ²n₀)`; at least one exactly when the condition holds.
    pub margin: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")))
    }
}

/// `n ≥ 8κ²n₀`.
pub fn check_rate_condition(n: f64, n0: f64, kappa: f64) -> Result<RateCondition> {
    positive("n", n)?;
    positive("n0", n0)?;
    positive("kappa", kappa)?;
    let margin = n / (8.0 * kappa * kappa * n0);
    Ok(RateCondition {
        holds: margin >= 1.0,
        margin,
    })
}

/// Bound values at iterations `0..len`, with the inputs that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub values: Vec<f64>,
    /// Per-iteration contraction factor of the geometric term.
    pub rate: f64,
    pub floor: f64,
    /// False when the sample condition fails; `values` are then empty.
    pub valid: bool,
    pub inputs: serde_json::Value,
}

impl BoundCurve {
    /// CSV with header `iter,bound`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iter,bound")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{i},{}", fmt_f64(*v))?;
        }
        Ok(())
    }
}

/// Inputs of the PGD guarantee.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PgdBound {
    pub n: f64,
    pub n0: f64,
    pub kappa: f64,
    pub eta: f64,
    pub sigma: f64,
    pub gamma: f64,
    /// `‖θ₀ − μθ*‖`.
    pub init_error: f64,
}

impl PgdBound {
    fn check(&self) -> Result<()> {
        positive("n", self.n)?;
        positive("n0", self.n0)?;
        positive("kappa", self.kappa)?;
        for (name, v) in [("eta", self.eta), ("sigma", self.sigma), ("gamma", self.gamma), ("init_error", self.init_error)] {
            nonnegative(name, v)?;
        }
        Ok(())
    }

    /// `√(8κ²n₀/n)`.
    pub fn rate(&self) -> f64 {
        (8.0 * self.kappa * self.kappa * self.n0 / self.n).sqrt()
    }

    pub fn floor(&self) -> Result<f64> {
        self.check()?;
        let rate = self.rate();
        if rate >= 1.0 {
            return Err(Error::BoundUndefined(format!(
                "rate {rate:.4} >= 1: n = {} is below 8 kappa^2 n0 = {}",
                self.n,
                8.0 * self.kappa * self.kappa * self.n0
            )));
        }
        Ok(self.kappa / (1.0 - rate) * self.eta * (self.sigma * self.n0.sqrt() + self.gamma) / self.n.sqrt())
    }

    pub fn at(&self, tau: usize) -> Result<f64> {
        let floor = self.floor()?;
        Ok(self.rate().powi(tau as i32) * self.init_error + floor)
    }

    /// Values for `τ = 0..len`. When the rate condition fails the curve
    /// is marked invalid and carries only the rate.
    pub fn curve(&self, len: usize) -> Result<BoundCurve> {
        self.check()?;
        let inputs = serde_json::to_value(self)?;
        match self.floor() {
            Ok(floor) => {
                let rate = self.rate();
                let values = (0..len).map(|t| rate.powi(t as i32) * self.init_error + floor).collect();
                Ok(BoundCurve { values, rate, floor, valid: true, inputs })
            }
            Err(Error::BoundUndefined(_)) => Ok(BoundCurve {
                values: Vec::new(),
                rate: self.rate(),
                floor: f64::INFINITY,
                valid: false,
                inputs,
            }),
            Err(e) => Err(e),
        }
    }
}

/// Inputs of the PSGD mean-squared-error guarantee.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsgdBound {
    pub n: f64,
    pub n0: f64,
    pub p: f64,
    pub eta: f64,
    pub sigma: f64,
    /// `‖θ₀ − μθ*‖²`.
    pub init_error_sq: f64,
}

impl PsgdBound {
    fn gap(&self) -> Result<f64> {
        positive("n", self.n)?;
        positive("n0", self.n0)?;
        positive("p", self.p)?;
        for (name, v) in [("eta", self.eta), ("sigma", self.sigma), ("init_error_sq", self.init_error_sq)] {
            nonnegative(name, v)?;
        }
        if self.n <= self.n0 {
            return Err(Error::BoundUndefined(format!(
                "needs n > n0, got n = {}, n0 = {}",
                self.n, self.n0
            )));
        }
        Ok(1.0 - (self.n0 / self.n).sqrt())
    }

    pub fn rate(&self) -> Result<f64> {
        let gap = self.gap()?;
        Ok(1.0 - gap * gap / (2.0 * self.p))
    }

    pub fn floor(&self) -> Result<f64> {
        let gap = self.gap()?;
        Ok(1.01 / (gap * gap) * self.eta * self.eta * self.sigma * self.sigma)
    }

    pub fn at(&self, tau: usize) -> Result<f64> {
        Ok(self.rate()?.powf(tau as f64) * self.init_error_sq + self.floor()?)
    }

    pub fn curve(&self, len: usize) -> Result<BoundCurve> {
        let inputs = serde_json::to_value(self)?;
        match (self.rate(), self.floor()) {
            (Ok(rate), Ok(floor)) => {
                let values = (0..len).map(|t| rate.powf(t as f64) * self.init_error_sq + floor).collect();
                Ok(BoundCurve { values, rate, floor, valid: true, inputs })
            }
            (Err(Error::BoundUndefined(_)), _) => Ok(BoundCurve {
                values: Vec::new(),
                rate: f64::NAN,
                floor: f64::INFINITY,
                valid: false,
                inputs,
            }),
            (Err(e), _) | (_, Err(e)) => Err(e),
        }
    }
}

/// Inputs of the closed-form bound on the shrinkage recursion `M_τ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxMBound {
    #[serde(rename = "M0")]
    pub m0: f64,
    pub rho: f64,
    pub eta: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub n: f64,
    pub n0_lambda: f64,
}

impl ProxMBound {
    fn check(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::Domain(format!("rho must lie in (0, 1), got {}", self.rho)));
        }
        positive("n", self.n)?;
        for (name, v) in [
            ("M0", self.m0),
            ("eta", self.eta),
            ("sigma", self.sigma),
            ("gamma", self.gamma),
            ("n0_lambda", self.n0_lambda),
        ] {
            nonnegative(name, v)?;
        }
        Ok(())
    }

    /// The per-step increment `η(σ√n₀(λ) + γ)/√n`.
    pub fn increment(&self) -> f64 {
        self.eta * (self.sigma * self.n0_lambda.sqrt() + self.gamma) / self.n.sqrt()
    }

    /// `ρ^τM₀ + η(σ√n₀(λ) + γ)/√n`.
    pub fn at(&self, tau: usize) -> Result<f64> {
        self.check()?;
        Ok(self.rho.powi(tau as i32) * self.m0 + self.increment())
    }

    /// `ρ^τM₀ + η(σ√n₀(λ) + γ)/(√n(1 − ρ))`, which dominates the
    /// recursion for every `τ` since the increments accumulate as a
    /// geometric series.
    pub fn geometric_at(&self, tau: usize) -> Result<f64> {
        self.check()?;
        Ok(self.rho.powi(tau as i32) * self.m0 + self.increment() / (1.0 - self.rho))
    }
}

/// Free-function form of [`ProxMBound::at`].
#[allow(clippy::too_many_arguments)]
pub fn prox_m_bound(tau: usize, m0: f64, rho: f64, eta: f64, sigma: f64, gamma: f64, n: f64, n0_lambda: f64) -> Result<f64> {
    ProxMBound { m0, rho, eta, sigma, gamma, n, n0_lambda }.at(tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pgd(n: f64, n0: f64, kappa: f64, eta: f64, init: f64) -> PgdBound {
        PgdBound { n, n0, kappa, eta, sigma: 0.6, gamma: 0.6, init_error: init }
    }

    #[test]
    fn rate_condition_examples() {
        assert_eq!(check_rate_condition(80.0, 10.0, 1.0).unwrap(), RateCondition { holds: true, margin: 1.0 });
        assert_eq!(check_rate_condition(80.0, 10.0, 2.0).unwrap(), RateCondition { holds: false, margin: 0.25 });
        assert_eq!(check_rate_condition(320.0, 10.0, 2.0).unwrap(), RateCondition { holds: true, margin: 1.0 });
        assert!(check_rate_condition(0.0, 10.0, 1.0).is_err());
    }

    #[test]
    fn pgd_examples() {
        let b = pgd(320.0, 10.0, 1.0, 0.0, 1.0);
        assert_eq!(b.rate(), 0.5);
        assert_eq!(b.at(3).unwrap(), 0.125);
        let noisy = pgd(320.0, 10.0, 1.0, 2.0, 1.0);
        assert_eq!(noisy.at(0).unwrap(), 1.0 + noisy.floor().unwrap());
        assert!(b.at(2000).unwrap() < 1e-300);
        assert!(matches!(pgd(80.0, 10.0, 2.0, 1.0, 1.0).at(0), Err(Error::BoundUndefined(_))));
        let c = pgd(80.0, 10.0, 2.0, 1.0, 1.0).curve(5).unwrap();
        assert!(!c.valid && c.values.is_empty() && c.rate == 2.0);
    }

    #[test]
    fn psgd_examples() {
        let b = PsgdBound { n: 400.0, n0: 100.0, p: 100.0, eta: 0.0, sigma: 0.0, init_error_sq: 1.0 };
        assert_eq!(b.at(0).unwrap(), 1.0);
        let sigma = (1.0 - 2.0 / std::f64::consts::PI).sqrt();
        let f = PsgdBound { eta: 1.0, sigma, ..b }.floor().unwrap();
        assert!((f - 1.01 * 4.0 * (1.0 - 2.0 / std::f64::consts::PI)).abs() < 1e-14);
        // 4-digit hand value computed with sigma rounded to 0.6028
        assert!((f - 1.4682).abs() < 5e-4);
        assert!(PsgdBound { n: 100.0, ..b }.at(0).is_err());
    }

    #[test]
    fn prox_examples() {
        assert_eq!(prox_m_bound(4, 2.0, 0.5, 0.0, 0.6, 0.6, 100.0, 25.0).unwrap(), 0.125);
        let at0 = prox_m_bound(0, 1.0, 0.5, 1.0, 0.6, 0.6, 100.0, 25.0).unwrap();
        assert!((at0 - 1.36).abs() < 1e-15);
        let at2 = prox_m_bound(2, 1.0, 0.5, 1.0, 0.6, 0.6, 100.0, 25.0).unwrap();
        assert!((at2 - 0.61).abs() < 1e-15);
        assert!(prox_m_bound(0, 1.0, 1.0, 1.0, 0.6, 0.6, 100.0, 25.0).is_err());
    }

    #[test]
    fn bound_csv() {
        let c = pgd(320.0, 10.0, 1.0, 0.0, 1.0).curve(2).unwrap();
        let mut out = Vec::new();
        c.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "iter,bound\n0,1.0000000000000000e0\n1,5.0000000000000000e-1\n");
    }
}
