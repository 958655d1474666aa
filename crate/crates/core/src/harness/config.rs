use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::RngSeed;
use crate::geometry::Regularizer;
use crate::links::Link;
use crate::solvers::{ProxSchedule, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Nonlinear observations against their noisy linear surrogate.
    OnebitVsLinear,
    /// PSGD against PGD at `n = 4p`, `s = p/10` over several `p`.
    PsgdScaling,
    /// One solver on one synthetic instance per trial.
    Solve,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Pgd,
    Psgd,
    Proxgd,
    ProxgdResampled,
}

/// Level schedule of the data-reuse proximal solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricLevels {
    pub lambda0: f64,
    pub rho: f64,
    #[serde(default)]
    pub lambda_min: f64,
}

/// JSON experiment description. Only `experiment` is required.
///
/// ```json
/// {
///   "experiment": "onebit-vs-linear",
///   "p": 500, "s": 10, "n": 250,
///   "link": {"kind": "sign"},
///   "trials": 100, "seed": 7,
///   "solver_config": {"max_iters": 200},
///   "out": "fig1a"
/// }
/// ```
///
/// `s` defaults to `p/50` (`p/10` for the scaling study) and `n` to `p/2`
/// (`4p`). Without a `regularizer` an ℓ1 ball is used; with `oracle`
/// set (the default) its level is replaced by `R(μθ*)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<usize>,
    #[serde(default = "default_link")]
    pub link: Link,
    #[serde(default = "default_regularizer")]
    pub regularizer: Regularizer,
    #[serde(default = "yes")]
    pub oracle: bool,
    #[serde(default = "default_solver")]
    pub solver: SolverKind,
    #[serde(default)]
    pub solver_config: SolverConfig,
    /// PSGD steps per unit of dimension in the scaling study.
    #[serde(default = "default_psgd_iters_per_p")]
    pub psgd_iters_per_p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ProxSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<GeometricLevels>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: RngSeed,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default = "default_window")]
    pub plateau_window: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_p() -> usize {
    500
}
fn default_p_list() -> Vec<usize> {
    vec![50, 100, 200]
}
fn default_link() -> Link {
    Link::Sign
}
fn default_regularizer() -> Regularizer {
    Regularizer::L1Ball { radius: 1.0 }
}
fn yes() -> bool {
    true
}
fn default_solver() -> SolverKind {
    SolverKind::Pgd
}
fn default_psgd_iters_per_p() -> usize {
    40
}
fn default_trials() -> usize {
    100
}
fn default_mc_samples() -> usize {
    1_000_000
}
fn default_window() -> usize {
    10
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        serde_json::from_value(serde_json::json!({ "experiment": experiment })).expect("defaults parse")
    }

    /// Parse with a diagnostic naming the offending field and position.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Config(format!(
                "field `{path}`: {inner} (line {}, column {})",
                inner.line(),
                inner.column()
            ))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Sparsity of the synthetic parameter.
    pub fn sparsity(&self, p: usize) -> usize {
        self.s.unwrap_or(match self.experiment {
            ExperimentKind::PsgdScaling => (p / 10).max(1),
            _ => (p / 50).max(1),
        })
    }

    pub fn samples(&self, p: usize) -> usize {
        self.n.unwrap_or(match self.experiment {
            ExperimentKind::PsgdScaling => 4 * p,
            _ => (p / 2).max(1),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, msg: String| Error::Config(format!("field `{name}`: {msg}"));
        if self.p == 0 {
            return Err(field("p", "must be >= 1".into()));
        }
        if self.trials == 0 {
            return Err(field("trials", "must be >= 1".into()));
        }
        if self.plateau_window == 0 {
            return Err(field("plateau_window", "must be >= 1".into()));
        }
        if self.experiment == ExperimentKind::PsgdScaling && (self.p_list.is_empty() || self.p_list.contains(&0)) {
            return Err(field("p_list", "must list positive dimensions".into()));
        }
        let dims: Vec<usize> = match self.experiment {
            ExperimentKind::PsgdScaling => self.p_list.clone(),
            _ => vec![self.p],
        };
        for p in dims {
            let s = self.sparsity(p);
            if s > p {
                return Err(field("s", format!("{s} exceeds p = {p}")));
            }
            if self.samples(p) == 0 {
                return Err(field("n", "must be >= 1".into()));
            }
        }
        self.link.validate().map_err(|e| field("link", e.to_string()))?;
        self.regularizer.validate().map_err(|e| field("regularizer", e.to_string()))?;
        self.solver_config.validate().map_err(|e| field("solver_config", e.to_string()))?;
        if let Some(s) = &self.schedule {
            s.validate().map_err(|e| field("schedule", e.to_string()))?;
        }
        if self.solver == SolverKind::ProxgdResampled && self.schedule.is_none() {
            return Err(field("schedule", "required by the proxgd-resampled solver".into()));
        }
        if self.solver == SolverKind::Proxgd && self.levels.is_none() {
            return Err(field("levels", "required by the proxgd solver".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_study() {
        let c = ExperimentConfig::from_json(r#"{"experiment": "onebit-vs-linear"}"#).unwrap();
        assert_eq!((c.p, c.samples(c.p), c.sparsity(c.p)), (500, 250, 10));
        assert_eq!(c.trials, 100);
        assert_eq!(c.solver_config.max_iters, 200);
        let s = ExperimentConfig::new(ExperimentKind::PsgdScaling);
        assert_eq!((s.samples(100), s.sparsity(100)), (400, 10));
    }

    #[test]
    fn diagnostics_name_the_field() {
        let err = ExperimentConfig::from_json("{\n  \"experiment\": \"solve\",\n  \"link\": {\"kind\": \"relu\"}\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("link") && msg.contains("line 3"), "{msg}");
        let err = ExperimentConfig::from_json(r#"{"experiment": "solve", "trails": 3}"#).unwrap_err();
        assert!(err.to_string().contains("trails"), "{err}");
        let err = ExperimentConfig::from_json(r#"{"experiment": "solve", "p": 10, "s": 11}"#).unwrap_err();
        assert!(err.to_string().contains("`s`"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn round_trip() {
        let text = r#"{"experiment": "psgd-scaling", "p_list": [20, 40], "link": {"kind": "quantize", "levels": 4, "clip": 2.0},
                      "regularizer": {"kind": "l2-ball", "R": 3.0}, "solver": "psgd", "seed": 9, "out": "x/y"}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        let again = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(c, again);
    }
}
