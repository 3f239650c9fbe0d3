use crate::error::{Error, Result};
use crate::grouping::GroupPartition;
use crate::linalg::Matrix;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExchangeabilityPoint {
    /// 0-based knockoff copy.
    pub copy: usize,
    pub i: usize,
    pub j: usize,
    /// `corr(Xᵢ, Xⱼ)`.
    pub original: f64,
    /// `corr(Xᵢ, X̃ⱼ)`.
    pub knockoff: f64,
}

/// Paired correlations for every ordered pair `i ≠ j` and copy, split by
/// whether `i` and `j` share a group. Only cross-group pairs must agree.
#[derive(Clone, Debug, Default)]
pub struct ExchangeabilityReport {
    pub cross: Vec<ExchangeabilityPoint>,
    pub within: Vec<ExchangeabilityPoint>,
    pub max_cross_deviation: f64,
    pub max_within_deviation: f64,
}

impl ExchangeabilityReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("kind,copy,i,j,original,knockoff\n");
        for (kind, pts) in [("cross", &self.cross), ("within", &self.within)] {
            for pt in pts {
                writeln!(s, "{kind},{},{},{},{},{}", pt.copy + 1, pt.i + 1, pt.j + 1, pt.original, pt.knockoff).unwrap();
            }
        }
        s
    }

    pub fn summary(&self) -> String {
        format!(
            "max_cross_deviation={:.6}\nmax_within_deviation={:.6}\ncross_pairs={}\nwithin_pairs={}\n",
            self.max_cross_deviation,
            self.max_within_deviation,
            self.cross.len(),
            self.within.len()
        )
    }
}

/// Compare `corr(Xᵢ, Xⱼ)` with `corr(Xᵢ, X̃ⱼ)` for all pairs and copies.
pub fn exchangeability_check(x: &Matrix, x_tilde: &Matrix, partition: &GroupPartition) -> Result<ExchangeabilityReport> {
    let (n, p) = (x.rows(), x.cols());
    if partition.p() != p || x_tilde.rows() != n || x_tilde.cols() % p != 0 || x_tilde.cols() == 0 {
        return Err(Error::Dimension("X, knockoffs and groups do not match".into()));
    }
    if n < 2 {
        return Err(Error::InvalidInput("need at least two rows".into()));
    }
    let m = x_tilde.cols() / p;
    let cols = p * (m + 1);
    // standardized columns of [X X̃]
    let mut z = Matrix::zeros(n, cols);
    for j in 0..cols {
        let col: Vec<f64> = if j < p { x.column(j) } else { x_tilde.column(j - p) };
        let mean = col.iter().sum::<f64>() / n as f64;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt();
        let inv = if sd > 0.0 { 1.0 / sd } else { 0.0 };
        for (r, v) in col.iter().enumerate() {
            z[(r, j)] = (v - mean) * inv;
        }
    }
    let corr = z.gram();
    let mut report = ExchangeabilityReport::default();
    for copy in 0..m {
        for i in 0..p {
            for j in 0..p {
                if i == j {
                    continue;
                }
                let pt = ExchangeabilityPoint {
                    copy,
                    i,
                    j,
                    original: corr[(i, j)],
                    knockoff: corr[(i, p * (copy + 1) + j)],
                };
                let dev = (pt.original - pt.knockoff).abs();
                if partition.group_of(i) == partition.group_of(j) {
                    report.max_within_deviation = report.max_within_deviation.max(dev);
                    report.within.push(pt);
                } else {
                    report.max_cross_deviation = report.max_cross_deviation.max(dev);
                    report.cross.push(pt);
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_copy_has_no_deviation() {
        let x = Matrix::from_fn(50, 3, |r, c| ((r * 7 + c * 13) % 11) as f64 + (c as f64) * (r as f64).sin());
        let rep = exchangeability_check(&x, &x, &GroupPartition::singletons(3)).unwrap();
        assert!(rep.max_cross_deviation < 1e-12);
        assert_eq!(rep.cross.len(), 6);
    }
}
