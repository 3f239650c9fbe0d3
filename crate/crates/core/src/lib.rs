//! Second-order group knockoffs.
//!
//! The crate is split the way the pipeline runs:
//!
//! * [`linalg`]: dense matrices, Cholesky factors with rank-1 maintenance,
//!   covariance estimation and PD regularization.
//! * [`grouping`]: hierarchical and interpolative-decomposition grouping, key
//!   variable selection.
//! * [`solver`]: the group-block-diagonal `S` matrix under the SDP, MVR and ME
//!   criteria, the equicorrelated closed form, and the key-variable reduction.
//! * [`sampler`]: Gaussian knockoff sampling, including the conditional route
//!   through key variables.
//! * [`inference`]: Gram-form Lasso, pseudo-validation, W statistics and the
//!   multiple-knockoff filter.
//! * [`sim`]: synthetic covariance families and end-to-end experiments.

pub mod error;
pub mod grouping;
pub mod inference;
pub mod linalg;
pub mod rng;
pub mod sampler;
pub mod sim;
pub mod solver;

pub use error::{Error, Result};
pub use grouping::{GroupPartition, KeySelection, Linkage};
pub use linalg::{CholeskyFactor, Matrix};
pub use sampler::KnockoffModel;
pub use solver::{Method, SMatrix, SolverConfig};
