//! Structure priors and the geometry that sets sample complexity.
//!
//! A [`Regularizer`] in constraint form defines the feasible set
//! `K = {θ : R(θ) ≤ level}` used by the projected solvers. The same
//! function's descent cone at the true parameter determines the minimal
//! sample count `n₀`, computed in [`samples`].

mod cone;
mod distance;
mod project;
pub mod samples;

use std::fmt;
use std::sync::Arc;

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cone::L1TangentCone;
pub use distance::{
    gaussian_distance_sq, gaussian_distance_sq_analytic_l1, gaussian_distance_sq_mc,
    gaussian_distance_sq_mc_grid, subgradient_distance_l1, DistanceMethod, GaussianDistance,
};
pub use project::{project_l1_ball, project_l2_ball, project_sparse, prox_l1};
pub use samples::{
    default_lambda_grid, descent_cone_width, log_spaced_grid, minimal_samples,
    minimal_samples_regularized, minimal_samples_regularized_with, minimal_samples_with,
    refine_grid, DescentConeStats, McBudget, MinimalSamples, WidthMethod,
};

type ProjectFn = dyn Fn(ArrayView1<f64>) -> Array1<f64> + Send + Sync;
type ValueFn = dyn Fn(ArrayView1<f64>) -> f64 + Send + Sync;

/// A user-supplied constraint set given by its projector and the value of
/// the function whose sub-level set it is.
#[derive(Clone)]
pub struct CustomRegularizer {
    pub name: String,
    pub is_convex: bool,
    pub level: f64,
    pub project: Arc<ProjectFn>,
    pub value: Arc<ValueFn>,
}

impl fmt::Debug for CustomRegularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomRegularizer")
            .field("name", &self.name)
            .field("is_convex", &self.is_convex)
            .field("level", &self.level)
            .finish()
    }
}

impl PartialEq for CustomRegularizer {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.is_convex == other.is_convex
            && self.level == other.level
            && Arc::ptr_eq(&self.project, &other.project)
    }
}

/// Constraint-form structure prior.
///
/// Config form: `{"kind": "l1-ball", "R": 3.1}`, `{"kind": "sparsity", "s": 10}`
/// or `{"kind": "l2-ball", "R": 1.0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Regularizer {
    L1Ball {
        #[serde(rename = "R")]
        radius: f64,
    },
    Sparsity {
        s: usize,
    },
    L2Ball {
        #[serde(rename = "R")]
        radius: f64,
    },
    #[serde(skip)]
    Custom(CustomRegularizer),
}

impl Regularizer {
    pub fn is_convex(&self) -> bool {
        match self {
            Regularizer::L1Ball { .. } | Regularizer::L2Ball { .. } => true,
            Regularizer::Sparsity { .. } => false,
            Regularizer::Custom(c) => c.is_convex,
        }
    }

    /// Projection-comparison constant: 1 for convex sets, 2 otherwise.
    pub fn kappa(&self) -> f64 {
        if self.is_convex() {
            1.0
        } else {
            2.0
        }
    }

    /// The constraint level (`R` for balls, `s` for sparsity).
    pub fn level(&self) -> f64 {
        match self {
            Regularizer::L1Ball { radius } | Regularizer::L2Ball { radius } => *radius,
            Regularizer::Sparsity { s } => *s as f64,
            Regularizer::Custom(c) => c.level,
        }
    }

    /// `R(v)`: ℓ1 norm, number of non-zeros, or ℓ2 norm.
    pub fn value(&self, v: ArrayView1<f64>) -> f64 {
        match self {
            Regularizer::L1Ball { .. } => v.iter().map(|x| x.abs()).sum(),
            Regularizer::Sparsity { .. } => v.iter().filter(|x| **x != 0.0).count() as f64,
            Regularizer::L2Ball { .. } => v.dot(&v).sqrt(),
            Regularizer::Custom(c) => (c.value)(v),
        }
    }

    pub fn project(&self, v: ArrayView1<f64>) -> Array1<f64> {
        match self {
            Regularizer::L1Ball { radius } => project_l1_ball(v, *radius),
            Regularizer::Sparsity { s } => project_sparse(v, *s),
            Regularizer::L2Ball { radius } => project_l2_ball(v, *radius),
            Regularizer::Custom(c) => (c.project)(v),
        }
    }

    pub fn is_feasible(&self, v: ArrayView1<f64>, tol: f64) -> bool {
        self.value(v) <= self.level() + tol
    }

    /// Same kind with its level set to `R(target)`, the oracle tuning
    /// `R = R(μθ*)`.
    pub fn tuned_to(&self, target: ArrayView1<f64>) -> Regularizer {
        let level = self.value(target);
        match self {
            Regularizer::L1Ball { .. } => Regularizer::L1Ball { radius: level },
            Regularizer::Sparsity { .. } => Regularizer::Sparsity { s: level as usize },
            Regularizer::L2Ball { .. } => Regularizer::L2Ball { radius: level },
            Regularizer::Custom(c) => Regularizer::Custom(CustomRegularizer { level, ..c.clone() }),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Regularizer::L1Ball { radius } => format!("l1-ball(R={radius})"),
            Regularizer::Sparsity { s } => format!("sparsity(s={s})"),
            Regularizer::L2Ball { radius } => format!("l2-ball(R={radius})"),
            Regularizer::Custom(c) => format!("custom({})", c.name),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Regularizer::L1Ball { radius } | Regularizer::L2Ball { radius }
                if !(*radius >= 0.0) || !radius.is_finite() =>
            {
                Err(Error::Config(format!("{}: R must be a finite, non-negative real", self.name())))
            }
            Regularizer::Sparsity { s: 0 } => Err(Error::Config("sparsity: s must be >= 1".into())),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn convexity_and_kappa() {
        assert_eq!(Regularizer::L1Ball { radius: 1.0 }.kappa(), 1.0);
        assert_eq!(Regularizer::L2Ball { radius: 1.0 }.kappa(), 1.0);
        assert_eq!(Regularizer::Sparsity { s: 3 }.kappa(), 2.0);
        assert!(!Regularizer::Sparsity { s: 3 }.is_convex());
    }

    #[test]
    fn oracle_tuning() {
        let target = array![0.5, -0.25, 0.0];
        assert_eq!(Regularizer::L1Ball { radius: 9.0 }.tuned_to(target.view()), Regularizer::L1Ball { radius: 0.75 });
        assert_eq!(Regularizer::Sparsity { s: 1 }.tuned_to(target.view()), Regularizer::Sparsity { s: 2 });
    }

    #[test]
    fn config_form() {
        let r: Regularizer = serde_json::from_str(r#"{"kind": "l1-ball", "R": 2.5}"#).unwrap();
        assert_eq!(r, Regularizer::L1Ball { radius: 2.5 });
        let s: Regularizer = serde_json::from_str(r#"{"kind": "sparsity", "s": 10}"#).unwrap();
        assert_eq!(s, Regularizer::Sparsity { s: 10 });
        assert_eq!(serde_json::to_string(&Regularizer::L2Ball { radius: 1.0 }).unwrap(), r#"{"kind":"l2-ball","R":1.0}"#);
        assert!(serde_json::from_str::<Regularizer>(r#"{"kind": "nuclear", "R": 1}"#).is_err());
        assert!(Regularizer::L1Ball { radius: -1.0 }.validate().is_err());
        assert!(Regularizer::Sparsity { s: 0 }.validate().is_err());
    }

    #[test]
    fn custom_box_constraint() {
        let boxed = Regularizer::Custom(CustomRegularizer {
            name: "box".into(),
            is_convex: true,
            level: 1.0,
            project: Arc::new(|v: ArrayView1<f64>| v.mapv(|x| x.clamp(-1.0, 1.0))),
            value: Arc::new(|v: ArrayView1<f64>| v.iter().fold(0.0f64, |m, x| m.max(x.abs()))),
        });
        let p = boxed.project(array![2.0, -0.5].view());
        assert_eq!(p, array![1.0, -0.5]);
        assert!(boxed.is_feasible(p.view(), 0.0));
        assert_eq!(boxed.kappa(), 1.0);
    }
}
