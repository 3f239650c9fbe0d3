//! Synthetic covariance families, data generation and end-to-end
//! experiments.

mod cov;
mod data;
mod experiment;

pub use cov::{gen_cov, CovKind, CovParams};
pub use data::{gen_data, Placement, SimData};
pub use experiment::{run_experiment, run_replicate, ExperimentResult, ReplicateResult, ScenarioSpec};
