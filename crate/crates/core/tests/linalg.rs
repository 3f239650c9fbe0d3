mod common;

use common::*;
use groupko::linalg::io::{decode_binary, encode_binary, parse_csv, to_csv};
use groupko::linalg::{
    cholesky_factorize, estimate_shrinkage_covariance, quadratic_forms, regularize_to_pd, Matrix, Rank1,
};
use groupko::Error;
use proptest::prelude::*;

fn rel_frobenius(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).frobenius_norm() / b.frobenius_norm().max(1e-300)
}

#[test]
fn factor_identity() {
    let f = cholesky_factorize(&Matrix::identity(3)).unwrap();
    assert_eq!(f.lower(), Matrix::identity(3));
}

#[test]
fn factor_two_by_two() {
    let a = Matrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 5.0]]).unwrap();
    let l = cholesky_factorize(&a).unwrap().lower();
    assert_eq!(l.as_slice(), &[2.0, 0.0, 1.0, 2.0]);
    // L·Lᵗ by hand
    let back = l.matmul(&l.transpose());
    assert!(back.max_abs_diff(&a) < 1e-15);
}

#[test]
fn factor_indefinite() {
    let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
    assert!(matches!(cholesky_factorize(&a), Err(Error::NotPositiveDefinite { .. })));
}

#[test]
fn update_matches_fresh_factor() {
    let mut f = cholesky_factorize(&Matrix::identity(2)).unwrap();
    f.rank1(&[1.0, 0.0], Rank1::Update).unwrap();
    let fresh = cholesky_factorize(&Matrix::from_diag(&[2.0, 1.0])).unwrap();
    assert!(f.lower().max_abs_diff(&fresh.lower()) < 1e-15);
    assert!((f.get(0, 0) - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn update_downdate_roundtrip() {
    let a = random_corr(6, 3);
    let f = cholesky_factorize(&a).unwrap();
    let w = [0.3, -0.2, 0.5, 0.1, 0.0, 0.4];
    let g = f.rank1_update(&w, Rank1::Update).unwrap().rank1_update(&w, Rank1::Downdate).unwrap();
    assert!(g.lower().max_abs_diff(&f.lower()) < 1e-12);
}

#[test]
fn downdate_losing_positivity() {
    let mut f = cholesky_factorize(&Matrix::identity(1)).unwrap();
    assert!(matches!(f.rank1(&[2.0], Rank1::Downdate), Err(Error::DowndateBreaksPositivity { .. })));
}

#[test]
fn forms_for_half_identity() {
    // Σ = I, S = 0.5I, m = 1, D = 1.5I; inverses are diagonal
    let ls = cholesky_factorize(&Matrix::identity(3).scaled(0.5)).unwrap();
    let ld = cholesky_factorize(&Matrix::identity(3).scaled(1.5)).unwrap();
    let q = quadratic_forms(&ld, &ls, 0, 1, true);
    let (inv_s, inv_d) = (1.0 / 0.5, 1.0 / 1.5);
    assert!((q.a_ii - inv_d).abs() < 1e-15 && (q.a_jj - inv_d).abs() < 1e-15 && q.a_ij == 0.0);
    assert!((q.b_ii - inv_s).abs() < 1e-15 && (q.b_jj - inv_s).abs() < 1e-15 && q.b_ij == 0.0);
    let so = q.second.unwrap();
    assert!((so.c_jj - inv_s * inv_s).abs() < 1e-14);
    assert!((so.d_jj - inv_d * inv_d).abs() < 1e-15);
}

#[test]
fn forms_for_identity() {
    let f = cholesky_factorize(&Matrix::identity(4)).unwrap();
    let q = quadratic_forms(&f, &f, 1, 3, false);
    assert_eq!((q.a_ii, q.a_ij, q.a_jj, q.b_ii, q.b_ij, q.b_jj), (1.0, 0.0, 1.0, 1.0, 0.0, 1.0));
    assert!(q.second.is_none());
}

#[test]
fn shrinkage_large_sample_near_identity() {
    let x = normal_matrix(100_000, 2, 17);
    let est = estimate_shrinkage_covariance(&x).unwrap();
    assert!(est.covariance.max_abs_diff(&Matrix::identity(2)) < 0.05);
}

/// Intensity `Σ_{i≠j} Var(s_ij) / Σ_{i≠j} s_ij²` written out directly.
fn intensity_oracle(x: &Matrix) -> f64 {
    let (n, p) = (x.rows(), x.cols());
    let nf = n as f64;
    let means: Vec<f64> = (0..p).map(|j| x.column(j).iter().sum::<f64>() / nf).collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..p {
        for j in 0..p {
            if i == j {
                continue;
            }
            let w: Vec<f64> = (0..n).map(|k| (x[(k, i)] - means[i]) * (x[(k, j)] - means[j])).collect();
            let wbar = w.iter().sum::<f64>() / nf;
            let var = nf / (nf - 1.0).powi(3) * w.iter().map(|v| (v - wbar).powi(2)).sum::<f64>();
            let s = nf / (nf - 1.0) * wbar;
            num += var;
            den += s * s;
        }
    }
    (num / den).clamp(0.0, 1.0)
}

#[test]
fn shrinkage_intensity_matches_formula() {
    for (n, p, seed) in [(2, 10, 5), (5, 10, 6), (40, 8, 7)] {
        let x = normal_matrix(n, p, seed);
        let est = estimate_shrinkage_covariance(&x).unwrap();
        assert!((est.intensity - intensity_oracle(&x)).abs() < 1e-12, "n = {n}");
    }
}

#[test]
fn shrinkage_keeps_sample_diagonal() {
    let x = normal_matrix(30, 6, 8);
    let est = estimate_shrinkage_covariance(&x).unwrap();
    let sample = groupko::linalg::sample_covariance(&x).unwrap();
    for j in 0..6 {
        assert!((est.covariance[(j, j)] - sample[(j, j)]).abs() < 1e-12);
    }
}

#[test]
fn shrinkage_rejects_constant_column() {
    let mut x = normal_matrix(10, 3, 9);
    for r in 0..10 {
        x.row_mut(r)[1] = 2.0;
    }
    assert!(matches!(estimate_shrinkage_covariance(&x), Err(Error::DegenerateData { column: 1 })));
}

#[test]
fn regularize_clips_negative_eigenvalue() {
    // eigenvalues 1.1 and −0.1
    let a = Matrix::from_rows(&[vec![0.5, 0.6], vec![0.6, 0.5]]).unwrap();
    let r = regularize_to_pd(&a, 1e-5);
    assert!(min_eig(&r) >= 1e-5 * (1.0 - 1e-9));
}

#[test]
fn regularize_leaves_pd_input() {
    // eigenvalues 1.7 and 0.3
    let a = Matrix::from_rows(&[vec![1.0, 0.7], vec![0.7, 1.0]]).unwrap();
    assert!(regularize_to_pd(&a, 1e-5).max_abs_diff(&a) < 1e-12);
}

#[test]
fn regularize_output_symmetric() {
    let g = normal_matrix(7, 7, 10);
    let a = g.add(&g.transpose());
    assert!(regularize_to_pd(&a, 1e-5).is_symmetric(0.0));
}

#[test]
fn matrix_files_roundtrip() {
    let a = normal_matrix(4, 3, 11);
    assert_eq!(decode_binary(&encode_binary(&a)).unwrap(), a);
    assert_eq!(parse_csv(&to_csv(&a)).unwrap(), a);
    let bytes = encode_binary(&a);
    assert_eq!(&bytes[..5], b"GKMX\x01");
}

fn pd_matrix(p: usize, seed: u64, shift: f64) -> Matrix {
    let g = normal_matrix(p, p, seed);
    g.matmul(&g.transpose()).scaled(1.0 / p as f64).add(&Matrix::identity(p).scaled(shift))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rank1_agrees_with_refactorization(p in 2usize..12, seed in 0u64..1000) {
        // λ_min > 1 keeps A − wwᵗ positive definite for unit w
        let a = pd_matrix(p, seed, 1.5);
        let f = cholesky_factorize(&a).unwrap();
        let dirs = normal_matrix(100, p, seed + 1);
        for k in 0..100 {
            let w: Vec<f64> = dirs.row(k).to_vec();
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            let w: Vec<f64> = w.iter().map(|v| v / norm).collect();
            let outer = Matrix::from_fn(p, p, |i, j| w[i] * w[j]);
            for (dir, target) in [(Rank1::Update, a.add(&outer)), (Rank1::Downdate, a.sub(&outer))] {
                let up = f.rank1_update(&w, dir).unwrap();
                let fresh = cholesky_factorize(&target).unwrap();
                prop_assert!(up.distance(&fresh) < 1e-8);
            }
        }
    }

    #[test]
    fn forms_agree_with_explicit_inverse(p in 2usize..=20, seed in 0u64..1000, i in 0usize..20, j in 0usize..20) {
        let (i, j) = (i % p, j % p);
        let d = pd_matrix(p, seed, 0.2);
        let s = pd_matrix(p, seed + 7, 0.2);
        let (di, si) = (na_inverse(&d), na_inverse(&s));
        let q = quadratic_forms(&cholesky_factorize(&d).unwrap(), &cholesky_factorize(&s).unwrap(), i, j, true);
        prop_assert!((q.a_ii - di[(i, i)]).abs() < 1e-9 && (q.a_ij - di[(i, j)]).abs() < 1e-9 && (q.a_jj - di[(j, j)]).abs() < 1e-9);
        prop_assert!((q.b_ii - si[(i, i)]).abs() < 1e-9 && (q.b_ij - si[(i, j)]).abs() < 1e-9 && (q.b_jj - si[(j, j)]).abs() < 1e-9);
        let (di2, si2) = (di.matmul(&di), si.matmul(&si));
        let so = q.second.unwrap();
        prop_assert!((so.c_ij - si2[(i, j)]).abs() < 1e-9 * si2[(i, i)].max(1.0));
        prop_assert!((so.d_ij - di2[(i, j)]).abs() < 1e-9 * di2[(i, i)].max(1.0));
    }

    #[test]
    fn regularize_is_idempotent(p in 2usize..10, seed in 0u64..1000, corr in any::<bool>()) {
        let g = normal_matrix(p, p, seed);
        let mut a = g.add(&g.transpose()).scaled(0.5);
        if corr {
            for k in 0..p { a[(k, k)] = 1.0; }
        }
        let once = regularize_to_pd(&a, 1e-5);
        let twice = regularize_to_pd(&once, 1e-5);
        prop_assert!(twice.max_abs_diff(&once) < 1e-12);
        prop_assert!(min_eig(&once) >= 1e-5 * (1.0 - 1e-9) - 1e-12);
    }

    #[test]
    fn factor_reproduces_input(p in 1usize..15, seed in 0u64..1000) {
        let a = pd_matrix(p, seed, 0.1);
        let f = cholesky_factorize(&a).unwrap();
        prop_assert!(rel_frobenius(&f.reconstruct(), &a) < 1e-10);
    }
}
