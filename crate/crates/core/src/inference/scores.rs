use crate::error::{Error, Result};
use crate::grouping::GroupPartition;
use crate::linalg::Matrix;

/// Group importance of the originals and of every knockoff copy.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupScores {
    pub z: Vec<f64>,
    /// `z_tilde[γ][ℓ]`.
    pub z_tilde: Vec<Vec<f64>>,
}

impl GroupScores {
    pub fn m(&self) -> usize {
        self.z_tilde.first().map_or(0, Vec::len)
    }

    /// Read a `g × (m+1)` matrix whose first column holds the originals.
    pub fn from_matrix(scores: &Matrix) -> Result<Self> {
        if scores.cols() < 2 {
            return Err(Error::Format("score matrix needs at least two columns".into()));
        }
        Ok(GroupScores {
            z: scores.column(0),
            z_tilde: (0..scores.rows()).map(|g| scores.row(g)[1..].to_vec()).collect(),
        })
    }

    pub fn to_matrix(&self) -> Matrix {
        let m = self.m();
        Matrix::from_fn(self.z.len(), m + 1, |g, c| if c == 0 { self.z[g] } else { self.z_tilde[g][c - 1] })
    }

    fn from_coordinates(values: &[f64], partition: &GroupPartition, m: usize) -> Self {
        let p = partition.p();
        let g = partition.num_groups();
        let mut z = vec![0.0; g];
        let mut z_tilde = vec![vec![0.0; m]; g];
        for (i, &v) in values.iter().enumerate() {
            let (copy, var) = (i / p, i % p);
            let grp = partition.group_of(var);
            if copy == 0 {
                z[grp] += v;
            } else {
                z_tilde[grp][copy - 1] += v;
            }
        }
        GroupScores { z, z_tilde }
    }
}

/// Sums of absolute coefficients per group, for the originals (first `p`
/// coordinates) and each copy (the following blocks of `p`).
pub fn group_scores(beta: &[f64], partition: &GroupPartition, m: usize) -> Result<GroupScores> {
    if beta.len() != partition.p() * (m + 1) {
        return Err(Error::Dimension(format!(
            "{} coefficients for p = {} and m = {m}",
            beta.len(),
            partition.p()
        )));
    }
    let abs: Vec<f64> = beta.iter().map(|b| b.abs()).collect();
    Ok(GroupScores::from_coordinates(&abs, partition, m))
}

/// Sums of squared marginal correlations `(xᵗy)²/n` per group, with `y` and
/// every column of the `n × p(m+1)` design standardized first.
pub fn marginal_scores(design: &Matrix, y: &[f64], partition: &GroupPartition, m: usize) -> Result<GroupScores> {
    let n = design.rows();
    if design.cols() != partition.p() * (m + 1) || y.len() != n {
        return Err(Error::Dimension("design, response and groups do not match".into()));
    }
    let ys = standardize(y);
    let stats: Vec<f64> = (0..design.cols())
        .map(|j| {
            let x = standardize(&design.column(j));
            let xy: f64 = x.iter().zip(&ys).map(|(a, b)| a * b).sum();
            xy * xy / n as f64
        })
        .collect();
    Ok(GroupScores::from_coordinates(&stats, partition, m))
}

fn standardize(v: &[f64]) -> Vec<f64> {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    let inv = if sd > 0.0 { 1.0 / sd } else { 0.0 };
    v.iter().map(|x| (x - mean) * inv).collect()
}
