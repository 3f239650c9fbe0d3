use super::GroupPartition;
use crate::error::Result;
use crate::linalg::{cholesky_factorize, Matrix};

/// Grouping around skeleton columns of an interpolative decomposition.
///
/// Centers are chosen greedily by largest residual variance
/// `c_j = Σ_jj − Σ_{j,S} Σ_{S,S}⁻¹ Σ_{S,j}` (a column-pivoted partial Cholesky)
/// until every remaining residual is below `resid_threshold`. Each other
/// variable joins its most correlated center. With `contiguous`, the variables
/// between two neighbouring centers are split at the single cut point that
/// maximizes the total absolute correlation to the assigned center, so every
/// group stays a range.
pub fn cluster_groups_id(
    sigma: &Matrix,
    resid_threshold: f64,
    contiguous: bool,
) -> Result<GroupPartition> {
    sigma.check_symmetric("covariance")?;
    cholesky_factorize(sigma)?;
    let p = sigma.rows();
    let centers = skeleton(sigma, resid_threshold);

    let mut owner = vec![usize::MAX; p];
    for &c in &centers {
        owner[c] = c;
    }
    if contiguous {
        let mut sorted = centers.clone();
        sorted.sort_unstable();
        let first = sorted[0];
        let last = *sorted.last().unwrap();
        for o in owner.iter_mut().take(first) {
            *o = first;
        }
        for o in owner.iter_mut().skip(last + 1) {
            *o = last;
        }
        for w in sorted.windows(2) {
            let (l, r) = (w[0], w[1]);
            // variables l+1..=t go left, t+1..r go right
            let mut best_t = l;
            let mut best = f64::NEG_INFINITY;
            for t in l..r {
                let left: f64 = (l + 1..=t).map(|i| sigma[(i, l)].abs()).sum();
                let right: f64 = (t + 1..r).map(|i| sigma[(i, r)].abs()).sum();
                if left + right > best {
                    best = left + right;
                    best_t = t;
                }
            }
            for (i, o) in owner.iter_mut().enumerate().take(r).skip(l + 1) {
                *o = if i <= best_t { l } else { r };
            }
        }
    } else {
        let mut sorted = centers.clone();
        sorted.sort_unstable();
        for i in 0..p {
            if owner[i] != usize::MAX {
                continue;
            }
            let mut best = (f64::NEG_INFINITY, usize::MAX);
            for &c in &sorted {
                let v = sigma[(i, c)].abs();
                if v > best.0 {
                    best = (v, c);
                }
            }
            owner[i] = best.1;
        }
    }
    Ok(GroupPartition::from_labels(&owner))
}

/// Greedy skeleton selection; returns centers in selection order.
fn skeleton(sigma: &Matrix, threshold: f64) -> Vec<usize> {
    let p = sigma.rows();
    let mut resid = sigma.diag();
    let mut chosen = vec![false; p];
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut centers = Vec::new();
    loop {
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for j in 0..p {
            if !chosen[j] && resid[j] > best.0 {
                best = (resid[j], j);
            }
        }
        let (c, j) = best;
        if j == usize::MAX || (!centers.is_empty() && c < threshold) || c <= 0.0 {
            break;
        }
        let piv = c.sqrt();
        let mut g: Vec<f64> = (0..p).map(|i| sigma[(i, j)]).collect();
        for prev in &cols {
            let f = prev[j];
            for (gi, pi) in g.iter_mut().zip(prev) {
                *gi -= f * pi;
            }
        }
        for v in g.iter_mut() {
            *v /= piv;
        }
        for i in 0..p {
            resid[i] -= g[i] * g[i];
        }
        chosen[j] = true;
        resid[j] = 0.0;
        cols.push(g);
        centers.push(j);
    }
    centers
}
