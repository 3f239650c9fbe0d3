//! The group-block-diagonal `S` matrix.
//!
//! All solvers return `S` with `0 ⪯ S ⪯ ((m+1)/m)Σ`, zero outside the group
//! blocks. [`solve_group_knockoffs`] runs alternating PCA and coordinate
//! sweeps while maintaining Cholesky factors of `S` and
//! `D = ((m+1)/m)Σ − S`; [`solve_equi`] is the closed-form equicorrelated
//! construction; [`solve_with_key_ci`] solves on key variables only and
//! extends the result to the full group.

mod blocks;
mod brent;
mod delta;
mod descent;
mod equi;
mod objective;
mod star;

pub use blocks::{independent_components, solve_blockwise};
pub use brent::brent_minimize;
pub use delta::{objective_change, optimal_delta, trace_changes, DirectionForms, FeasibleInterval, SdpTerms, StepContext};
pub use descent::solve_group_knockoffs;
pub use equi::solve_equi;
pub use objective::objective;
pub use star::{extend_star_s, solve_with_key_ci};

use crate::error::{Error, Result};
use crate::grouping::GroupPartition;
use crate::linalg::{block_diagonal, Matrix};
use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Equicorrelated closed form (eSDP).
    Equi,
    Sdp,
    Mvr,
    Me,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Equi => "esdp",
            Method::Sdp => "sdp",
            Method::Mvr => "mvr",
            Method::Me => "me",
        }
    }

    pub const ALL: [Method; 4] = [Method::Equi, Method::Sdp, Method::Mvr, Method::Me];
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "esdp" | "equi" => Ok(Method::Equi),
            "sdp" => Ok(Method::Sdp),
            "mvr" => Ok(Method::Mvr),
            "me" | "maxent" => Ok(Method::Me),
            other => Err(Error::InvalidInput(format!("unknown method {other:?}"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which passes make up one sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Alternation {
    BackToBack,
    PcaOnly,
    CdOnly,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub method: Method,
    pub m: usize,
    /// Relative objective change that ends the solve.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Largest entrywise change of `S` over a sweep below which the solve ends.
    pub min_change: f64,
    /// Slack taken off both ends of every feasible interval.
    pub eps: f64,
    pub alternation: Alternation,
    pub brent_tol: f64,
    pub brent_max_iter: usize,
    /// Sweeps between refactorization checks.
    pub check_every: usize,
    pub drift_tol: f64,
    /// Steps of the SDP and MVR solves are shortened so that `tr(S⁻¹)` and
    /// `tr(D⁻¹)` stay below `p / cond_floor`.
    pub cond_floor: f64,
}

impl SolverConfig {
    pub fn new(method: Method, m: usize) -> Self {
        SolverConfig {
            method,
            m,
            tol: 1e-4,
            max_sweeps: 100,
            min_change: 1e-4,
            eps: 1e-6,
            alternation: Alternation::BackToBack,
            brent_tol: 1e-8,
            brent_max_iter: 100,
            check_every: 10,
            drift_tol: 1e-6,
            cond_floor: 1e-5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::InvalidInput("m must be at least 1".into()));
        }
        if !(self.tol > 0.0) || !(self.eps > 0.0) || !(self.cond_floor > 0.0) {
            return Err(Error::InvalidInput("tol, eps and cond_floor must be positive".into()));
        }
        if self.max_sweeps == 0 || self.check_every == 0 {
            return Err(Error::InvalidInput("max_sweeps and check_every must be positive".into()));
        }
        Ok(())
    }

    /// `(m+1)/m`.
    pub fn scale(&self) -> f64 {
        (self.m as f64 + 1.0) / self.m as f64
    }
}

/// Group-block-diagonal symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SMatrix {
    p: usize,
    groups: Vec<Vec<usize>>,
    blocks: Vec<Matrix>,
}

impl SMatrix {
    pub fn from_blocks(partition: &GroupPartition, blocks: Vec<Matrix>) -> Result<Self> {
        if blocks.len() != partition.num_groups() {
            return Err(Error::Dimension(format!(
                "{} blocks for {} groups",
                blocks.len(),
                partition.num_groups()
            )));
        }
        for (g, b) in blocks.iter().enumerate() {
            let k = partition.members(g).len();
            if b.rows() != k || b.cols() != k {
                return Err(Error::Dimension(format!("block {} is not {k}x{k}", g + 1)));
            }
        }
        Ok(SMatrix { p: partition.p(), groups: partition.groups().to_vec(), blocks })
    }

    /// Keep the within-group entries of a dense matrix.
    pub fn from_dense(dense: &Matrix, partition: &GroupPartition) -> Self {
        let blocks = partition.groups().iter().map(|m| dense.principal(m)).collect();
        SMatrix { p: partition.p(), groups: partition.groups().to_vec(), blocks }
    }

    pub fn order(&self) -> usize {
        self.p
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn block(&self, g: usize) -> &Matrix {
        &self.blocks[g]
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn to_dense(&self) -> Matrix {
        block_diagonal(self.p, &self.groups, &self.blocks)
    }

    /// Number of free entries, `Σ_γ |A_γ|²`.
    pub fn size(&self) -> usize {
        self.groups.iter().map(|g| g.len() * g.len()).sum()
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub method: Method,
    pub m: usize,
    pub sweeps: usize,
    pub converged: bool,
    /// Objective before the first sweep and after each sweep (lower is better).
    pub objective_trace: Vec<f64>,
    /// `(sweep, Frobenius deviation)` at every refactorization check.
    pub drift: Vec<(usize, f64)>,
    /// Steps whose rank-1 maintenance failed and were skipped.
    pub rejected_steps: usize,
    pub lambda_min_s: f64,
    pub lambda_min_d: f64,
}

impl SolveReport {
    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().unwrap_or(&f64::NAN)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "method={}", self.method).unwrap();
        writeln!(s, "m={}", self.m).unwrap();
        writeln!(s, "sweeps={}", self.sweeps).unwrap();
        writeln!(s, "converged={}", self.converged).unwrap();
        writeln!(s, "objective={:.12e}", self.final_objective()).unwrap();
        writeln!(s, "lambda_min_s={:.6e}", self.lambda_min_s).unwrap();
        writeln!(s, "lambda_min_d={:.6e}", self.lambda_min_d).unwrap();
        s
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub s: SMatrix,
    pub report: SolveReport,
}

fn check_inputs(sigma: &Matrix, partition: &GroupPartition) -> Result<()> {
    sigma.check_symmetric("covariance")?;
    if partition.p() != sigma.rows() {
        return Err(Error::Dimension(format!(
            "partition covers {} variables, covariance has {}",
            partition.p(),
            sigma.rows()
        )));
    }
    Ok(())
}
