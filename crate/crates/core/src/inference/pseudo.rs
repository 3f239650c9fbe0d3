use super::lasso::{lasso_path, LassoConfig};
use crate::error::{Error, Result};
use crate::linalg::{dot, sym_eigen, Matrix};
use crate::rng::{fill_normal, seeded};

#[derive(Clone, Debug)]
pub struct PseudoValidation {
    pub lambda: f64,
    /// Score of every grid point; `−∞` where the fit is all zero.
    pub scores: Vec<f64>,
    /// Training and validation statistics of the split.
    pub r_train: Vec<f64>,
    pub r_valid: Vec<f64>,
}

/// `len` log-spaced values from `max|r|` down to `ratio·max|r|`.
pub fn lambda_grid(r: &[f64], len: usize, ratio: f64) -> Vec<f64> {
    let top = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if len <= 1 {
        return vec![top];
    }
    (0..len)
        .map(|k| top * ratio.powf(k as f64 / (len - 1) as f64))
        .collect()
}

/// Choose `λ` by pseudo-validation, drawing the split noise `N(0, A)` from
/// an eigendecomposition of `A`.
pub fn pseudo_validate(
    r: &[f64],
    a: &Matrix,
    n: usize,
    grid: &[f64],
    seed: u64,
    cfg: &LassoConfig,
) -> Result<PseudoValidation> {
    if a.rows() != r.len() || !a.is_square() {
        return Err(Error::Dimension("Gram matrix and linear terms differ in size".into()));
    }
    let root = sym_eigen(a).sqrt_factor();
    let mut eta = vec![0.0; r.len()];
    fill_normal(&mut seeded(seed), &mut eta);
    let noise: Vec<f64> = (0..r.len()).map(|i| dot(root.row(i), &eta)).collect();
    pseudo_validate_with_noise(r, a, n, grid, &noise, cfg)
}

/// Pseudo-validation with a given `N(0, A)` draw.
///
/// With `n_t = round(0.8n)` and `n_v = n − n_t`, the training statistics are
/// `r_t = r + √(n_v/(n·n_t))·noise` and the validation statistics
/// `r_v = (n·r − n_t·r_t)/n_v`. Each `λ` is fit on `r_t` and scored by
/// `βᵗr_v / √(βᵗAβ)`; the best score wins, earlier grid points on ties.
pub fn pseudo_validate_with_noise(
    r: &[f64],
    a: &Matrix,
    n: usize,
    grid: &[f64],
    noise: &[f64],
    cfg: &LassoConfig,
) -> Result<PseudoValidation> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty lambda grid".into()));
    }
    if noise.len() != r.len() {
        return Err(Error::Dimension("noise and linear terms differ in length".into()));
    }
    if n < 2 {
        return Err(Error::InvalidInput("pseudo-validation needs n ≥ 2".into()));
    }
    let n_t = ((0.8 * n as f64).round() as usize).clamp(1, n - 1);
    let n_v = n - n_t;
    let (nf, ntf, nvf) = (n as f64, n_t as f64, n_v as f64);
    let scale = (nvf / (nf * ntf)).sqrt();
    let r_train: Vec<f64> = r.iter().zip(noise).map(|(x, e)| x + scale * e).collect();
    let r_valid: Vec<f64> = r.iter().zip(&r_train).map(|(x, t)| (nf * x - ntf * t) / nvf).collect();

    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&i, &j| grid[j].total_cmp(&grid[i]));
    let sorted: Vec<f64> = order.iter().map(|&i| grid[i]).collect();
    let fits = lasso_path(a, &r_train, &sorted, cfg)?;
    let mut scores = vec![f64::NEG_INFINITY; grid.len()];
    for (beta, &i) in fits.iter().zip(&order) {
        if beta.iter().all(|&b| b == 0.0) {
            continue;
        }
        let quad = dot(beta, &a.matvec(beta));
        if quad > 0.0 {
            scores[i] = dot(beta, &r_valid) / quad.sqrt();
        }
    }
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if s > f64::NEG_INFINITY && best.is_none_or(|b| s > scores[b]) {
            best = Some(i);
        }
    }
    // a single grid point is returned as is
    match best.or((grid.len() == 1).then_some(0)) {
        Some(b) => Ok(PseudoValidation { lambda: grid[b], scores, r_train, r_valid }),
        None => Err(Error::AllZeroPaths),
    }
}
