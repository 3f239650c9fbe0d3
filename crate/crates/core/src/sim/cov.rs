use crate::error::{Error, Result};
use crate::linalg::{cholesky_factorize, corr_from_cov, lambda_min, Matrix};
use crate::rng::seeded;
use rand::Rng as _;
use rand_distr::{Beta, Distribution};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CovKind {
    Block,
    ErCov,
    ErPrec,
    Ar1,
    /// AR(1) covariance; experiments place the causal variables contiguously.
    Ar1Corr,
    Toeplitz,
}

impl CovKind {
    pub fn name(self) -> &'static str {
        match self {
            CovKind::Block => "block",
            CovKind::ErCov => "er_cov",
            CovKind::ErPrec => "er_prec",
            CovKind::Ar1 => "ar1",
            CovKind::Ar1Corr => "ar1_corr",
            CovKind::Toeplitz => "toeplitz",
        }
    }
}

impl FromStr for CovKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "block" => CovKind::Block,
            "er_cov" | "er" => CovKind::ErCov,
            "er_prec" => CovKind::ErPrec,
            "ar1" => CovKind::Ar1,
            "ar1_corr" => CovKind::Ar1Corr,
            "toeplitz" => CovKind::Toeplitz,
            other => return Err(Error::InvalidInput(format!("unknown covariance kind {other:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CovParams {
    /// Block size of the block family.
    pub block_size: usize,
    pub rho: f64,
    /// Cross-block correlation is `gamma·rho`.
    pub gamma: f64,
    /// Block size of the Erdős–Rényi families.
    pub er_block: usize,
    pub er_prob: f64,
    pub toeplitz_rho: f64,
    /// Smallest eigenvalue enforced after generation.
    pub min_eigen: f64,
}

impl Default for CovParams {
    fn default() -> Self {
        CovParams {
            block_size: 5,
            rho: 0.75,
            gamma: 0.25,
            er_block: 10,
            er_prob: 0.1,
            toeplitz_rho: 0.9,
            min_eigen: 0.001,
        }
    }
}

/// Correlation matrix of the requested family.
///
/// Every family is rescaled to unit diagonal; if the smallest eigenvalue is
/// then below `min_eigen`, `(min_eigen − λ_min)·I` is added and the result
/// rescaled again.
pub fn gen_cov(kind: CovKind, p: usize, params: &CovParams, seed: u64) -> Result<Matrix> {
    if p < 2 {
        return Err(Error::InvalidInput("p must be at least 2".into()));
    }
    let mut rng = seeded(seed);
    let raw = match kind {
        CovKind::Block => {
            let b = params.block_size.max(1);
            Matrix::from_fn(p, p, |i, j| {
                if i == j {
                    1.0
                } else if i / b == j / b {
                    params.rho
                } else {
                    params.gamma * params.rho
                }
            })
        }
        CovKind::ErCov | CovKind::ErPrec => {
            let b = params.er_block.max(1);
            let mut v = Matrix::identity(p);
            for i in 0..p {
                for j in i + 1..p {
                    if i / b != j / b {
                        continue;
                    }
                    let omega = rng.random_range(0.3..0.9) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    let phi = rng.random_bool(params.er_prob);
                    if phi {
                        v[(i, j)] = omega;
                        v[(j, i)] = omega;
                    }
                }
            }
            let shift = lambda_min(&v).abs() + 0.1;
            let shifted = v.add(&Matrix::identity(p).scaled(shift));
            if kind == CovKind::ErCov {
                shifted
            } else {
                let mut inv = cholesky_factorize(&shifted)?.inverse();
                inv.symmetrize();
                inv
            }
        }
        CovKind::Ar1 | CovKind::Ar1Corr => {
            let beta = Beta::new(3.0, 1.0).expect("valid Beta parameters");
            let mut cum = vec![0.0; p];
            for i in 1..p {
                let rho: f64 = beta.sample(&mut rng);
                cum[i] = cum[i - 1] + rho.max(f64::MIN_POSITIVE).ln();
            }
            Matrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { (-(cum[i] - cum[j]).abs()).exp() })
        }
        CovKind::Toeplitz => {
            Matrix::from_fn(p, p, |i, j| params.toeplitz_rho.powi((i as i32 - j as i32).abs()))
        }
    };
    let mut sigma = corr_from_cov(&raw)?;
    let lmin = lambda_min(&sigma);
    if lmin < params.min_eigen {
        sigma = corr_from_cov(&sigma.add(&Matrix::identity(p).scaled(params.min_eigen - lmin)))?;
    }
    sigma.symmetrize();
    Ok(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toeplitz_entries() {
        let s = gen_cov(CovKind::Toeplitz, 4, &CovParams::default(), 0).unwrap();
        assert_eq!(s[(0, 3)], 0.9f64.powi(3));
        assert_eq!(s[(2, 1)], 0.9);
    }

    #[test]
    fn block_entries() {
        let s = gen_cov(CovKind::Block, 15, &CovParams::default(), 0).unwrap();
        assert_eq!(s[(0, 4)], 0.75);
        assert_eq!(s[(0, 5)], 0.1875);
    }
}
