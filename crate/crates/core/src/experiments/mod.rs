//! Data generation and the Monte Carlo harness for the static-regression and
//! chaotic-prediction experiments.

mod config;
mod data;
mod harness;

pub use config::{ExperimentConfig, ExperimentKind, SigmaPolicy};
pub use data::{
    embed, gen_static, gen_static_with_rng, lorenz_series, silverman_init, static_target, Dataset,
    LorenzParams,
};
pub use harness::{
    build_filter, mean, run_data, run_monte_carlo, run_monte_carlo_with, run_policy, run_rng,
    std_dev, Curve, MonteCarloResult, PolicyResult, PolicySummary, RunTrace,
};
