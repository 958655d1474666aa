//! Experiment orchestration, lemma checks and the command-line front end.

mod cli;
mod config;
mod experiments;
mod lemmas;

pub use cli::{cli_main, cli_run, parse_link};
pub use config::{ExperimentConfig, ExperimentKind, GeometricLevels, SolverKind};
pub use experiments::{
    config_stats, draw_instance, iters_to_half, run_experiment, run_onebit_vs_linear, run_psgd_scaling, run_solve,
    run_solver, trial_regularizer, trial_seed, OnebitSummary, ScalingPoint, ScalingSummary, SolveSummary,
};
pub use lemmas::{
    cone_directions, cone_projection_norm, effective_noise_statistic, restricted_eig_statistic,
    validate_effective_noise, validate_restricted_eigs, validate_restricted_eigs_with, LemmaCheckReport,
};
