#![allow(dead_code)]

use groupko::grouping::{GroupPartition, KeySelection};
use groupko::linalg::Matrix;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn from_na(m: &DMatrix<f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn na_inverse(m: &Matrix) -> Matrix {
    from_na(&to_na(m).try_inverse().expect("invertible"))
}

pub fn min_eig(m: &Matrix) -> f64 {
    let mut a = to_na(m);
    a = (&a + a.transpose()) * 0.5;
    a.symmetric_eigenvalues().min()
}

pub fn normal_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut r = rng(seed);
    Matrix::from_fn(rows, cols, |_, _| r.sample(StandardNormal))
}

/// Random positive definite correlation matrix with moderate conditioning.
pub fn random_corr(p: usize, seed: u64) -> Matrix {
    let g = normal_matrix(p, p + 3, seed);
    let a = g.matmul(&g.transpose());
    let d: Vec<f64> = a.diag().iter().map(|v| 1.0 / v.sqrt()).collect();
    Matrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { a[(i.min(j), i.max(j))] * d[i.min(j)] * d[i.max(j)] })
}

pub fn ar1(p: usize, rho: f64) -> Matrix {
    Matrix::from_fn(p, p, |i, j| rho.powi((i as i32 - j as i32).abs()))
}

/// Correlation matrix with exact group-key conditional independence.
///
/// Groups are contiguous blocks of `size`; the first `keys` members of every
/// group are its keys. The keys have a random correlation; every non-key is
/// a linear function of its own group's keys plus noise independent of
/// everything else.
pub fn ci_structured(groups: usize, size: usize, keys: usize, seed: u64) -> (Matrix, GroupPartition, KeySelection) {
    let mut r = rng(seed);
    let n_keys = groups * keys;
    let sigma_star = random_corr(n_keys, seed ^ 0xA5);
    let p = groups * size;
    // X = T·(key latent, noise) with T assembled per variable
    let dagger = size - keys;
    let dim = n_keys + groups * dagger;
    let mut t = Matrix::zeros(p, dim);
    let root = {
        let f = groupko::linalg::cholesky_factorize(&sigma_star).unwrap();
        f.lower()
    };
    for g in 0..groups {
        for a in 0..keys {
            let var = g * size + a;
            let key = g * keys + a;
            for c in 0..n_keys {
                t[(var, c)] = root[(key, c)];
            }
        }
        for d in 0..dagger {
            let var = g * size + keys + d;
            let coefs: Vec<f64> = (0..keys).map(|_| r.random_range(-0.8..0.8)).collect();
            for (a, coef) in coefs.iter().enumerate() {
                let key = g * keys + a;
                for c in 0..n_keys {
                    t[(var, c)] += coef * root[(key, c)];
                }
            }
            // within-group noise, correlated across this group's non-keys only
            for e in 0..dagger {
                let col = n_keys + g * dagger + e;
                t[(var, col)] = r.random_range(-0.3..0.3) + if d == e { 1.0 } else { 0.0 };
            }
        }
    }
    let cov = t.matmul(&t.transpose());
    let sigma = groupko::linalg::corr_from_cov(&cov).unwrap();
    let partition = GroupPartition::contiguous_blocks(p, size);
    let key_list: Vec<usize> = (0..groups).flat_map(|g| (0..keys).map(move |a| g * size + a)).collect();
    let sel = KeySelection::from_key_indices(&partition, &key_list).unwrap();
    (sigma, partition, sel)
}

/// Nonincreasing up to `slack·max(1, |previous|)` per step.
pub fn is_monotone(trace: &[f64], slack: f64) -> bool {
    trace.windows(2).all(|w| w[1] <= w[0] + slack * w[0].abs().max(1.0))
}
