use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array1;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{ExperimentConfig, ExperimentKind, SolverKind};
use crate::error::{Error, Result};
use crate::gaussian::{sample_design_with, DesignMatrix, RngSeed};
use crate::geometry::{default_lambda_grid, minimal_samples, minimal_samples_regularized, Regularizer};
use crate::links::{link_stats, LinkStats};
use crate::solvers::{
    fmt_f64, mean_trace, pgd_solve, plateau, proxgd_resampled_solve, proxgd_solve, psgd_solve,
    sparse_unit_vector, GaussianMinibatches, Problem, ResampledTrace, SolverConfig, SolverTrace,
};

const STATS_SALT: u64 = 0x5354_4154;

/// Unit `s`-sparse `θ*` and an `n × p` design for trial seed `seed`,
/// drawn from separate streams so either can be regenerated alone.
pub fn draw_instance(p: usize, n: usize, s: usize, seed: RngSeed) -> Result<(Array1<f64>, DesignMatrix)> {
    let theta = sparse_unit_vector(p, s, &mut seed.stream(0))?;
    let x = sample_design_with(n, p, &mut seed.stream(1))?;
    Ok((theta, x))
}

/// Seed of trial `k` under a base seed.
pub fn trial_seed(base: RngSeed, k: usize) -> RngSeed {
    base.derive(k as u64 + 1)
}

/// Link statistics for a configuration: closed form when available,
/// otherwise Monte Carlo with `mc_samples` draws.
pub fn config_stats(cfg: &ExperimentConfig) -> Result<LinkStats> {
    link_stats(&cfg.link, cfg.mc_samples, cfg.seed.derive(STATS_SALT))
}

/// The regularizer used on a trial: the configured one, or in oracle mode
/// the same kind with level `R(μθ*)`.
pub fn trial_regularizer(cfg: &ExperimentConfig, target: &Array1<f64>) -> Regularizer {
    if cfg.oracle {
        cfg.regularizer.tuned_to(target.view())
    } else {
        cfg.regularizer.clone()
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_trace(dir: Option<&Path>, name: &str, trace: &SolverTrace) -> Result<()> {
    match dir {
        Some(d) => write_file(&d.join(name), |w| trace.write_csv(w)),
        None => Ok(()),
    }
}

fn write_json(dir: Option<&Path>, name: &str, value: &impl Serialize) -> Result<()> {
    match dir {
        Some(d) => write_file(&d.join(name), |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        }),
        None => Ok(()),
    }
}

fn write_series(dir: Option<&Path>, name: &str, header: &str, iters: &[usize], values: &[f64]) -> Result<()> {
    match dir {
        Some(d) => write_file(&d.join(name), |w| {
            writeln!(w, "iter,{header}")?;
            for (i, v) in iters.iter().zip(values) {
                writeln!(w, "{i},{}", fmt_f64(*v))?;
            }
            Ok(())
        }),
        None => Ok(()),
    }
}

/// Runs the configured solver on one problem. PSGD chains are averaged
/// (error column = root mean squared error).
pub fn run_solver(
    cfg: &ExperimentConfig,
    problem: &Problem,
    reg: &Regularizer,
    stats: &LinkStats,
    seed: RngSeed,
) -> Result<(SolverTrace, Option<ResampledTrace>)> {
    let config = SolverConfig {
        seed,
        ..cfg.solver_config.clone()
    };
    match cfg.solver {
        SolverKind::Pgd => Ok((pgd_solve(problem, reg, &config)?, None)),
        SolverKind::Psgd => Ok((psgd_solve(problem, reg, &config)?.mean_trace(), None)),
        SolverKind::Proxgd => {
            let lv = cfg.levels.ok_or_else(|| Error::Config("field `levels`: required".into()))?;
            Ok((proxgd_solve(problem, reg, lv.lambda0, lv.rho, lv.lambda_min, &config)?, None))
        }
        SolverKind::ProxgdResampled => {
            let sched = cfg.schedule.ok_or_else(|| Error::Config("field `schedule`: required".into()))?;
            let theta = problem
                .theta_star()
                .ok_or_else(|| Error::Precondition("resampling needs a synthetic problem".into()))?;
            let target = problem.target().expect("oracle present");
            let n0 = minimal_samples_regularized(reg, target.view(), sched.lambda, sched.t)?.n0;
            let mut source = GaussianMinibatches::new(problem.n(), problem.link().clone(), theta.clone(), seed.derive(7))?;
            let out = proxgd_resampled_solve(&mut source, reg, &sched, stats, n0, Some(target.view()), &config)?;
            Ok((out.trace.clone(), Some(out)))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnebitSummary {
    pub p: usize,
    pub n: usize,
    pub s: usize,
    pub trials: usize,
    pub mu: f64,
    pub sigma: f64,
    pub n0: f64,
    /// `√(n₀/n)·σ`, the predicted order of the plateau.
    pub predicted_plateau: f64,
    pub plateau_onebit: f64,
    pub plateau_linear: f64,
    /// `|onebit − linear| / linear`.
    pub relative_gap: f64,
    pub first_iter_error_onebit: f64,
    pub first_iter_error_linear: f64,
    pub plateau_window: usize,
}

/// Nonlinear observations against the noisy linear model
/// `y = μXθ* + w`, `w ~ N(0, σ²I)`, on the same `X` and `θ*` per trial.
///
/// Writes `trial_XXX_onebit.csv`, `trial_XXX_linear.csv`, `mean.csv`
/// (nonlinear model), `mean_linear.csv` and `summary.json` under `out`.
pub fn run_onebit_vs_linear(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<OnebitSummary> {
    cfg.validate()?;
    if cfg.solver == SolverKind::ProxgdResampled {
        return Err(Error::Unsupported("the resampled solver has no linear counterpart on fixed data".into()));
    }
    let (p, n, s) = (cfg.p, cfg.samples(cfg.p), cfg.sparsity(cfg.p));
    let stats = config_stats(cfg)?;
    let (mu, sigma) = (stats.mu, stats.sigma());
    let mut onebit = Vec::with_capacity(cfg.trials);
    let mut linear = Vec::with_capacity(cfg.trials);
    let mut n0 = None;
    for k in 0..cfg.trials {
        let seed = trial_seed(cfg.seed, k);
        let (theta, x) = draw_instance(p, n, s, seed)?;
        let target = &theta * mu;
        let reg = trial_regularizer(cfg, &target);
        if n0.is_none() {
            n0 = Some(minimal_samples(&reg, target.view(), 0.0, &default_lambda_grid())?.n0);
        }
        let nonlinear = Problem::from_link(x.clone(), theta.clone(), cfg.link.clone(), mu)?;
        let surrogate = Problem::noisy_linear(x, theta, mu, sigma, &mut seed.stream(2))?;
        let (a, _) = run_solver(cfg, &nonlinear, &reg, &stats, seed)?;
        let (b, _) = run_solver(cfg, &surrogate, &reg, &stats, seed)?;
        write_trace(out, &format!("trial_{k:03}_onebit.csv"), &a)?;
        write_trace(out, &format!("trial_{k:03}_linear.csv"), &b)?;
        onebit.push(a);
        linear.push(b);
    }
    let mean_a = mean_trace(&onebit).expect("trials >= 1");
    let mean_b = mean_trace(&linear).expect("trials >= 1");
    write_trace(out, "mean.csv", &mean_a)?;
    write_trace(out, "mean_linear.csv", &mean_b)?;
    let ea = mean_a.errors();
    let eb = mean_b.errors();
    let plateau_onebit = plateau(&ea, cfg.plateau_window).unwrap();
    let plateau_linear = plateau(&eb, cfg.plateau_window).unwrap();
    let n0 = n0.unwrap();
    let summary = OnebitSummary {
        p,
        n,
        s,
        trials: cfg.trials,
        mu,
        sigma,
        n0,
        predicted_plateau: (n0 / n as f64).sqrt() * sigma,
        plateau_onebit,
        plateau_linear,
        relative_gap: (plateau_onebit - plateau_linear).abs() / plateau_linear,
        first_iter_error_onebit: ea.get(1).copied().unwrap_or(ea[0]),
        first_iter_error_linear: eb.get(1).copied().unwrap_or(eb[0]),
        plateau_window: cfg.plateau_window,
    };
    write_json(out, "summary.json", &summary)?;
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub p: usize,
    pub n: usize,
    pub s: usize,
    pub psgd_iters: usize,
    /// Root of the plateau of the mean squared error, PSGD.
    pub plateau_psgd: f64,
    pub plateau_pgd: f64,
    pub ratio: f64,
    /// First PSGD iteration at which the mean squared error has lost half
    /// of its initial excess over the plateau.
    pub iters_to_half: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSummary {
    pub points: Vec<ScalingPoint>,
    pub trials: usize,
    pub plateau_window: usize,
}

fn mean_sq(traces: &[SolverTrace]) -> Vec<f64> {
    let k = traces.len() as f64;
    (0..traces[0].records.len())
        .map(|j| traces.iter().map(|t| t.records[j].error.unwrap().powi(2)).sum::<f64>() / k)
        .collect()
}

/// Iteration with the excess over `floor` first at half its initial value.
pub fn iters_to_half(iters: &[usize], values: &[f64], floor: f64) -> usize {
    let half = 0.5 * (values[0] - floor);
    iters
        .iter()
        .zip(values)
        .find(|(_, v)| *v - floor <= half)
        .map(|(i, _)| *i)
        .unwrap_or(*iters.last().unwrap())
}

/// PSGD against PGD at `n = 4p`, `s = p/10` for every `p` in `p_list`.
///
/// Each repetition draws fresh data and runs both solvers on it; PSGD
/// runs `psgd_iters_per_p · p` steps. Writes `p_XXX/pgd_mse.csv`,
/// `p_XXX/psgd_mse.csv` (`iter,mse`) and `summary.json`.
pub fn run_psgd_scaling(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<ScalingSummary> {
    cfg.validate()?;
    let stats = config_stats(cfg)?;
    let mu = stats.mu;
    let mut points = Vec::new();
    for &p in &cfg.p_list {
        let (n, s) = (cfg.samples(p), cfg.sparsity(p));
        let psgd_iters = cfg.psgd_iters_per_p * p;
        let psgd_config = SolverConfig {
            max_iters: psgd_iters,
            trials: 1,
            track_residual: false,
            ..cfg.solver_config.clone()
        };
        let mut pgd_traces = Vec::with_capacity(cfg.trials);
        let mut psgd_traces = Vec::with_capacity(cfg.trials);
        for k in 0..cfg.trials {
            let seed = trial_seed(cfg.seed.derive(p as u64), k);
            let (theta, x) = draw_instance(p, n, s, seed)?;
            let target = &theta * mu;
            let reg = trial_regularizer(cfg, &target);
            let problem = Problem::from_link(x, theta, cfg.link.clone(), mu)?;
            let pgd_config = SolverConfig {
                seed,
                ..cfg.solver_config.clone()
            };
            pgd_traces.push(pgd_solve(&problem, &reg, &pgd_config)?);
            let chain = psgd_solve(&problem, &reg, &SolverConfig { seed, ..psgd_config.clone() })?;
            psgd_traces.push(chain.trials.into_iter().next().expect("one chain"));
        }
        let pgd_mse = mean_sq(&pgd_traces);
        let psgd_mse = mean_sq(&psgd_traces);
        let dir = out.map(|o| o.join(format!("p_{p:03}")));
        write_series(dir.as_deref(), "pgd_mse.csv", "mse", &pgd_traces[0].iters(), &pgd_mse)?;
        write_series(dir.as_deref(), "psgd_mse.csv", "mse", &psgd_traces[0].iters(), &psgd_mse)?;
        let plateau_pgd = plateau(&pgd_mse, cfg.plateau_window).unwrap().sqrt();
        let plateau_psgd = plateau(&psgd_mse, cfg.plateau_window).unwrap().sqrt();
        points.push(ScalingPoint {
            p,
            n,
            s,
            psgd_iters,
            plateau_psgd,
            plateau_pgd,
            ratio: plateau_psgd / plateau_pgd,
            iters_to_half: iters_to_half(&psgd_traces[0].iters(), &psgd_mse, plateau_psgd * plateau_psgd),
        });
    }
    let summary = ScalingSummary {
        points,
        trials: cfg.trials,
        plateau_window: cfg.plateau_window,
    };
    write_json(out, "summary.json", &summary)?;
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub p: usize,
    pub n: usize,
    pub s: usize,
    pub trials: usize,
    pub solver: SolverKind,
    pub regularizer: String,
    pub mu: f64,
    pub plateau: f64,
    pub final_errors: Vec<f64>,
    pub plateau_window: usize,
}

/// The configured solver on `trials` synthetic instances. Writes
/// `trial_XXX.csv`, `mean.csv`, `schedule_XXX.csv` for the resampled
/// solver, and `summary.json`.
pub fn run_solve(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<SolveSummary> {
    cfg.validate()?;
    let (p, n, s) = (cfg.p, cfg.samples(cfg.p), cfg.sparsity(cfg.p));
    let stats = config_stats(cfg)?;
    let mut traces = Vec::with_capacity(cfg.trials);
    let mut reg_name = String::new();
    for k in 0..cfg.trials {
        let seed = trial_seed(cfg.seed, k);
        let (theta, x) = draw_instance(p, n, s, seed)?;
        let target = &theta * stats.mu;
        let reg = trial_regularizer(cfg, &target);
        reg_name = reg.name();
        let problem = Problem::from_link(x, theta, cfg.link.clone(), stats.mu)?;
        let (trace, resampled) = run_solver(cfg, &problem, &reg, &stats, seed)?;
        write_trace(out, &format!("trial_{k:03}.csv"), &trace)?;
        if let (Some(r), Some(d)) = (resampled, out) {
            write_file(&d.join(format!("schedule_{k:03}.csv")), |w| r.write_schedule_csv(w))?;
        }
        traces.push(trace);
    }
    let mean = mean_trace(&traces).expect("trials >= 1");
    write_trace(out, "mean.csv", &mean)?;
    let summary = SolveSummary {
        p,
        n,
        s,
        trials: cfg.trials,
        solver: cfg.solver,
        regularizer: reg_name,
        mu: stats.mu,
        plateau: plateau(&mean.errors(), cfg.plateau_window).unwrap(),
        final_errors: traces.iter().map(|t| t.final_error().unwrap()).collect(),
        plateau_window: cfg.plateau_window,
    };
    write_json(out, "summary.json", &summary)?;
    Ok(summary)
}

/// Dispatches on `cfg.experiment` and returns the summary as JSON.
pub fn run_experiment(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<serde_json::Value> {
    let value = match cfg.experiment {
        ExperimentKind::OnebitVsLinear => serde_json::to_value(run_onebit_vs_linear(cfg, out)?)?,
        ExperimentKind::PsgdScaling => serde_json::to_value(run_psgd_scaling(cfg, out)?)?,
        ExperimentKind::Solve => serde_json::to_value(run_solve(cfg, out)?)?,
    };
    if let Some(d) = out {
        write_file(&d.join("config.json"), |w| {
            writeln!(w, "{}", cfg.to_json())?;
            Ok(())
        })?;
    }
    Ok(json!({ "experiment": cfg.experiment, "summary": value }))
}
