//! Finite-sample analysis: linearized estimator of `Q − S*`, run
//! allocation, required run counts and simulated experiments.

mod linear;
mod monte_carlo;
mod plan;

pub use linear::{
    bernoulli_variance, calibrated_estimator, estimator_functional, linearized_bound, Branch,
    CalibrationConstants, LinearFunctional, DEFAULT_CALIBRATION_RUNS, MEASURED,
};
pub use monte_carlo::{replication_rng, simulate_experiment, simulate_from_plan, simulate_replications};
pub use plan::{calibrated_setup, plan_runs, plan_with_counts, required_runs, required_runs_for, RunPlan, MAX_RUNS};
