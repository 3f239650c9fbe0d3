use super::{check_inputs, solve_group_knockoffs, SMatrix, Solution, SolverConfig};
use crate::error::{Error, Result};
use crate::grouping::{GroupPartition, KeySelection};
use crate::linalg::{cholesky_factorize, Matrix};

/// Extend a solution over the key variables to every variable.
///
/// Per group, with keys `K` and non-keys `N`, `Q = −Σ_KK⁻¹ Σ_KN`,
/// `S_KN = −S_K Q` and `S_NN = Σ_NN − Σ_NK Σ_KK⁻¹ Σ_KN + Qᵗ S_K Q`.
/// `s_star` is indexed by the keys in ascending order, grouped by
/// [`KeySelection::key_partition`].
pub fn extend_star_s(
    sigma: &Matrix,
    partition: &GroupPartition,
    keys: &KeySelection,
    s_star: &SMatrix,
) -> Result<SMatrix> {
    check_inputs(sigma, partition)?;
    if s_star.order() != keys.num_keys() || s_star.groups().len() != partition.num_groups() {
        return Err(Error::Dimension("key solution does not match the key selection".into()));
    }
    let mut blocks = Vec::with_capacity(partition.num_groups());
    for (g, members) in partition.groups().iter().enumerate() {
        let kk = &keys.keys[g];
        let nn = &keys.non_keys[g];
        let sk = s_star.block(g);
        if sk.rows() != kk.len() {
            return Err(Error::Dimension(format!("key block {} has the wrong size", g + 1)));
        }
        let pos = |v: usize| members.iter().position(|&x| x == v).expect("key belongs to its group");
        let mut block = Matrix::zeros(members.len(), members.len());
        for (a, &i) in kk.iter().enumerate() {
            for (b, &j) in kk.iter().enumerate() {
                block[(pos(i), pos(j))] = sk[(a, b)];
            }
        }
        if !nn.is_empty() {
            let f = cholesky_factorize(&sigma.principal(kk))?;
            let s_kn = sigma.submatrix(kk, nn);
            // Q = −Σ_KK⁻¹ Σ_KN
            let q = f.solve_matrix(&s_kn).scaled(-1.0);
            let s_kq = sk.matmul(&q);
            let schur = sigma.principal(nn).add(&s_kn.transpose().matmul(&q));
            let mut s_nn = schur.add(&q.transpose().matmul(&s_kq));
            s_nn.symmetrize();
            for (a, &i) in kk.iter().enumerate() {
                for (b, &j) in nn.iter().enumerate() {
                    let v = -s_kq[(a, b)];
                    block[(pos(i), pos(j))] = v;
                    block[(pos(j), pos(i))] = v;
                }
            }
            for (a, &i) in nn.iter().enumerate() {
                for (b, &j) in nn.iter().enumerate() {
                    block[(pos(i), pos(j))] = s_nn[(a, b)];
                }
            }
        }
        blocks.push(block);
    }
    SMatrix::from_blocks(partition, blocks)
}

/// Solve on the key variables, then extend to the full groups.
///
/// The report describes the key-variable solve.
pub fn solve_with_key_ci(
    sigma: &Matrix,
    partition: &GroupPartition,
    keys: &KeySelection,
    config: &SolverConfig,
) -> Result<Solution> {
    check_inputs(sigma, partition)?;
    let idx = keys.all_keys();
    let sigma_star = sigma.principal(&idx);
    let star_partition = keys.key_partition(partition);
    let star = solve_group_knockoffs(&sigma_star, &star_partition, config)?;
    let s = extend_star_s(sigma, partition, keys, &star.s)?;
    Ok(Solution { s, report: star.report })
}
