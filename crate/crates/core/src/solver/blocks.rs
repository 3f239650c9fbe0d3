use super::{check_inputs, solve_group_knockoffs, SMatrix, SolveReport, SolverConfig};
use crate::error::Result;
use crate::grouping::GroupPartition;
use crate::linalg::Matrix;

/// Sets of groups that are linked by nonzero covariance, each sorted by
/// variable index. Different sets can be solved independently.
pub fn independent_components(sigma: &Matrix, partition: &GroupPartition) -> Vec<Vec<usize>> {
    let g = partition.num_groups();
    let mut parent: Vec<usize> = (0..g).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    let p = sigma.rows();
    for i in 0..p {
        for j in i + 1..p {
            if sigma[(i, j)] != 0.0 {
                let (a, b) = (find(&mut parent, partition.group_of(i)), find(&mut parent, partition.group_of(j)));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; g];
    for i in 0..p {
        let r = find(&mut parent, partition.group_of(i));
        if slot[r] == usize::MAX {
            slot[r] = comps.len();
            comps.push(Vec::new());
        }
        comps[slot[r]].push(i);
    }
    comps
}

/// Solve every independent block of `Σ` separately (in parallel with the
/// `parallel` feature) and assemble the full `S`.
pub fn solve_blockwise(
    sigma: &Matrix,
    partition: &GroupPartition,
    config: &SolverConfig,
) -> Result<(SMatrix, Vec<SolveReport>)> {
    check_inputs(sigma, partition)?;
    let comps = independent_components(sigma, partition);
    let solve_one = |idx: &Vec<usize>| {
        let sub = sigma.principal(idx);
        let labels: Vec<usize> = idx.iter().map(|&i| partition.group_of(i)).collect();
        let sub_part = GroupPartition::from_labels(&labels);
        solve_group_knockoffs(&sub, &sub_part, config).map(|s| (s.s.to_dense(), s.report))
    };
    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        comps.par_iter().map(solve_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = comps.iter().map(solve_one).collect();

    let p = sigma.rows();
    let mut dense = Matrix::zeros(p, p);
    let mut reports = Vec::with_capacity(comps.len());
    for (idx, res) in comps.iter().zip(results) {
        let (s, report) = res?;
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                dense[(i, j)] = s[(a, b)];
            }
        }
        reports.push(report);
    }
    Ok((SMatrix::from_dense(&dense, partition), reports))
}
