use super::{sym_eigen, Matrix};
use crate::error::{Error, Result};

/// Unbiased sample covariance of the columns of `x`.
pub fn sample_covariance(x: &Matrix) -> Result<Matrix> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 rows, got {n}")));
    }
    let centered = center_columns(x);
    Ok(centered.gram().scaled(1.0 / (n as f64 - 1.0)))
}

fn center_columns(x: &Matrix) -> Matrix {
    let (n, p) = (x.rows(), x.cols());
    let mut means = vec![0.0; p];
    for i in 0..n {
        for (m, v) in means.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let mut c = x.clone();
    for i in 0..n {
        for (v, m) in c.row_mut(i).iter_mut().zip(&means) {
            *v -= m;
        }
    }
    c
}

/// Shrinkage estimate together with the intensity that produced it.
#[derive(Clone, Debug)]
pub struct Shrinkage {
    pub covariance: Matrix,
    pub intensity: f64,
}

/// Linear shrinkage of the sample covariance toward its own diagonal.
///
/// The intensity is the Ledoit–Wolf optimum for the diagonal target,
/// `Σ_{i≠j} Var(s_ij) / Σ_{i≠j} s_ij²`, with `Var(s_ij)` estimated from the
/// per-row cross products, clamped to `[0, 1]`.
pub fn estimate_shrinkage_covariance(x: &Matrix) -> Result<Shrinkage> {
    let (n, p) = (x.rows(), x.cols());
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 rows, got {n}")));
    }
    if !x.is_finite() {
        return Err(Error::InvalidInput("data has non-finite entries".into()));
    }
    let xc = center_columns(x);
    let nf = n as f64;
    let mut sum_w = Matrix::zeros(p, p);
    let mut sum_w2 = Matrix::zeros(p, p);
    for k in 0..n {
        let row = xc.row(k);
        for i in 0..p {
            for j in i + 1..p {
                let w = row[i] * row[j];
                sum_w[(i, j)] += w;
                sum_w2[(i, j)] += w * w;
            }
            sum_w[(i, i)] += row[i] * row[i];
        }
    }
    for j in 0..p {
        if sum_w[(j, j)] <= 0.0 {
            return Err(Error::DegenerateData { column: j });
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..p {
        for j in i + 1..p {
            let wbar = sum_w[(i, j)] / nf;
            let ss = (sum_w2[(i, j)] - nf * wbar * wbar).max(0.0);
            num += nf / (nf - 1.0).powi(3) * ss;
            let s = sum_w[(i, j)] / (nf - 1.0);
            den += s * s;
        }
    }
    let intensity = if den > 0.0 { (num / den).clamp(0.0, 1.0) } else { 1.0 };
    let mut cov = Matrix::zeros(p, p);
    for i in 0..p {
        cov[(i, i)] = sum_w[(i, i)] / (nf - 1.0);
        for j in i + 1..p {
            let v = (1.0 - intensity) * sum_w[(i, j)] / (nf - 1.0);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(Shrinkage { covariance: cov, intensity })
}

/// Rescale a covariance matrix to unit diagonal.
pub fn corr_from_cov(cov: &Matrix) -> Result<Matrix> {
    let d = cov.diag();
    if let Some(j) = d.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::DegenerateData { column: j });
    }
    let s: Vec<f64> = d.iter().map(|v| 1.0 / v.sqrt()).collect();
    let mut out = Matrix::from_fn(cov.rows(), cov.cols(), |i, j| cov[(i, j)] * s[i] * s[j]);
    for i in 0..out.rows() {
        out[(i, i)] = 1.0;
    }
    Ok(out)
}

/// Clip eigenvalues below `eig_floor` up to it.
///
/// Inputs with unit diagonal are returned with unit diagonal; the rescaling
/// can pull the smallest eigenvalue under the floor again, in which case the
/// result is blended with the identity just enough to restore it.
pub fn regularize_to_pd(a: &Matrix, eig_floor: f64) -> Matrix {
    assert!(a.is_square(), "regularize_to_pd needs a square matrix");
    let eig = sym_eigen(a);
    let trigger = eig_floor * (1.0 - 1e-9);
    if eig.values.first().is_none_or(|&l| l >= trigger) {
        let mut out = a.clone();
        out.symmetrize();
        return out;
    }
    let unit = a.has_unit_diagonal(1e-12);
    let mut out = eig.reassemble(|l| l.max(eig_floor));
    if unit {
        out = corr_from_cov(&out).expect("clipped matrix has a positive diagonal");
        let lmin = super::lambda_min(&out);
        if lmin < eig_floor {
            let t = (eig_floor - lmin) / (1.0 - eig_floor);
            let n = out.rows();
            for i in 0..n {
                for j in 0..n {
                    let id = if i == j { t } else { 0.0 };
                    out[(i, j)] = (out[(i, j)] + id) / (1.0 + t);
                }
            }
        }
    }
    out.symmetrize();
    out
}
