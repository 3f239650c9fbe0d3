use super::{GroupPartition, KeySelection};
use crate::error::Result;
use crate::linalg::{cholesky_factorize, Matrix};

/// Below this a residual variance counts as zero.
const TINY: f64 = 1e-12;

/// Greedy key selection per group.
///
/// Keys are added one at a time, each time taking the variable that
/// maximizes the total variance of the remaining non-keys explained by the
/// keys, until the mean of `η_j / ζ_j` over the non-keys reaches `c`. Here
/// `η_j` is the variance of `X_j` explained by the group's keys and `ζ_j` the
/// variance explained by every variable outside the non-key set. Every group
/// gets at least one key, and `c ≥ 1` makes every variable a key.
pub fn select_key_variables(
    sigma: &Matrix,
    partition: &GroupPartition,
    c: f64,
) -> Result<KeySelection> {
    sigma.check_symmetric("covariance")?;
    if c >= 1.0 {
        let mut all = KeySelection::all(partition);
        all.threshold_c = Some(c);
        return Ok(all);
    }
    let precision = cholesky_factorize(sigma)?.inverse();
    let mut keys = Vec::with_capacity(partition.num_groups());
    let mut non_keys = Vec::with_capacity(partition.num_groups());
    for members in partition.groups() {
        let (k, n) = select_in_group(sigma, &precision, members, c)?;
        keys.push(k);
        non_keys.push(n);
    }
    Ok(KeySelection { keys, non_keys, threshold_c: Some(c) })
}

fn select_in_group(
    sigma: &Matrix,
    precision: &Matrix,
    members: &[usize],
    c: f64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let k = members.len();
    // residual covariance of the group given the current keys
    let mut resid = sigma.principal(members);
    let mut eta = vec![0.0; k];
    let mut is_key = vec![false; k];
    loop {
        let rest: Vec<usize> = (0..k).filter(|&a| !is_key[a]).collect();
        if rest.is_empty() {
            break;
        }
        if is_key.iter().any(|&b| b) {
            let ratio = mean_ratio(sigma, precision, members, &rest, &eta)?;
            if ratio >= c {
                break;
            }
        }
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for &j in &rest {
            let rjj = resid[(j, j)];
            let score: f64 = rest
                .iter()
                .filter(|&&l| l != j)
                .map(|&l| {
                    let gain = if rjj > TINY { resid[(l, j)].powi(2) / rjj } else { 0.0 };
                    eta[l] + gain
                })
                .sum();
            if score > best.0 {
                best = (score, j);
            }
        }
        let j = best.1;
        let rjj = resid[(j, j)];
        if rjj > TINY {
            let col: Vec<f64> = (0..k).map(|a| resid[(a, j)]).collect();
            for &l in &rest {
                eta[l] += col[l] * col[l] / rjj;
            }
            for a in 0..k {
                for b in 0..k {
                    resid[(a, b)] -= col[a] * col[b] / rjj;
                }
            }
        }
        is_key[j] = true;
    }
    let keys = (0..k).filter(|&a| is_key[a]).map(|a| members[a]).collect();
    let non_keys = (0..k).filter(|&a| !is_key[a]).map(|a| members[a]).collect();
    Ok((keys, non_keys))
}

/// Mean of `η_j / ζ_j` over `rest` (local indices into `members`).
fn mean_ratio(
    sigma: &Matrix,
    precision: &Matrix,
    members: &[usize],
    rest: &[usize],
    eta: &[f64],
) -> Result<f64> {
    let global: Vec<usize> = rest.iter().map(|&a| members[a]).collect();
    // Var(X_R | X_{-R}) = ((Σ⁻¹)_RR)⁻¹
    let cond = cholesky_factorize(&precision.principal(&global))?.inverse();
    let mut total = 0.0;
    for (t, &a) in rest.iter().enumerate() {
        let zeta = sigma[(global[t], global[t])] - cond[(t, t)];
        total += ratio(eta[a], zeta);
    }
    Ok(total / rest.len() as f64)
}

fn ratio(eta: f64, zeta: f64) -> f64 {
    if zeta.abs() < TINY {
        1.0
    } else {
        eta / zeta
    }
}

/// Stopping ratio `mean η_j/ζ_j` for one group, recomputed from scratch.
///
/// Returns `None` when the group has no non-key variables.
pub fn key_ratio(sigma: &Matrix, keys: &[usize], non_keys: &[usize]) -> Result<Option<f64>> {
    if non_keys.is_empty() {
        return Ok(None);
    }
    let p = sigma.rows();
    let kk = cholesky_factorize(&sigma.principal(keys))?;
    let outside: Vec<usize> = (0..p).filter(|i| !non_keys.contains(i)).collect();
    let oo = if outside.is_empty() { None } else { Some(cholesky_factorize(&sigma.principal(&outside))?) };
    let mut total = 0.0;
    for &j in non_keys {
        let sk: Vec<f64> = keys.iter().map(|&a| sigma[(j, a)]).collect();
        let u = kk.half_solve(&sk);
        let eta: f64 = u.iter().map(|v| v * v).sum();
        let zeta = match &oo {
            Some(f) => {
                let so: Vec<f64> = outside.iter().map(|&a| sigma[(j, a)]).collect();
                f.half_solve(&so).iter().map(|v| v * v).sum()
            }
            None => 0.0,
        };
        total += ratio(eta, zeta);
    }
    Ok(Some(total / non_keys.len() as f64))
}
