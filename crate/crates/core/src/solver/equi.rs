use super::{check_inputs, SMatrix};
use crate::error::{Error, Result};
use crate::grouping::GroupPartition;
use crate::linalg::{block_diagonal, lambda_min, sym_eigen, Matrix};

/// Equicorrelated construction `S_γ = τ·Σ_γ`.
///
/// `τ = min{1, ((m+1)/m)·λ_min(BΣB)}` with `B` the block-diagonal matrix of
/// the `Σ_γ^{-1/2}`, the largest common scaling allowed by
/// `S ⪯ ((m+1)/m)Σ`.
pub fn solve_equi(sigma: &Matrix, partition: &GroupPartition, m: usize) -> Result<SMatrix> {
    check_inputs(sigma, partition)?;
    if m < 1 {
        return Err(Error::InvalidInput("m must be at least 1".into()));
    }
    let p = sigma.rows();
    let mut inv_sqrt = Vec::with_capacity(partition.num_groups());
    for members in partition.groups() {
        let eig = sym_eigen(&sigma.principal(members));
        if let Some(k) = eig.values.iter().position(|&l| !(l > 0.0)) {
            return Err(Error::NotPositiveDefinite { index: members[k.min(members.len() - 1)], pivot: eig.values[k] });
        }
        inv_sqrt.push(eig.reassemble(|l| 1.0 / l.sqrt()));
    }
    let b = block_diagonal(p, partition.groups(), &inv_sqrt);
    let mut bsb = b.matmul(sigma).matmul(&b);
    bsb.symmetrize();
    let lmin = lambda_min(&bsb);
    let scale = (m as f64 + 1.0) / m as f64;
    let tau = (scale * lmin).min(1.0);
    if !(tau > 0.0) {
        return Err(Error::NotPositiveDefinite { index: 0, pivot: lmin });
    }
    let blocks = partition.groups().iter().map(|g| sigma.principal(g).scaled(tau)).collect();
    SMatrix::from_blocks(partition, blocks)
}
