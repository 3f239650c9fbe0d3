use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug)]
pub struct LassoConfig {
    /// Full passes over all coordinates before giving up.
    pub max_iter: usize,
    /// Largest allowed KKT residual.
    pub tol: f64,
}

impl Default for LassoConfig {
    fn default() -> Self {
        LassoConfig { max_iter: 10_000, tol: 1e-7 }
    }
}

fn soft(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Largest violation of the optimality conditions of
/// `(1/2)βᵗAβ − rᵗβ + λ‖β‖₁` at `β`, given the gradient `Aβ − r`.
fn kkt_from_grad(beta: &[f64], grad: &[f64], lambda: f64) -> f64 {
    beta.iter()
        .zip(grad)
        .map(|(&b, &g)| if b == 0.0 { (g.abs() - lambda).max(0.0) } else { (g + lambda * b.signum()).abs() })
        .fold(0.0, f64::max)
}

pub fn kkt_residual(a: &Matrix, r: &[f64], lambda: f64, beta: &[f64]) -> f64 {
    let grad: Vec<f64> = a.matvec(beta).iter().zip(r).map(|(x, y)| x - y).collect();
    kkt_from_grad(beta, &grad, lambda)
}

/// Coordinate descent for `(1/2)βᵗAβ − rᵗβ + λ‖β‖₁` with `A` positive
/// semidefinite, starting from `beta` and overwriting it.
fn lasso_in_place(a: &Matrix, r: &[f64], lambda: f64, beta: &mut [f64], cfg: &LassoConfig) -> Result<()> {
    let p = r.len();
    let mut grad: Vec<f64> = a.matvec(beta).iter().zip(r).map(|(x, y)| x - y).collect();
    let update = |j: usize, beta: &mut [f64], grad: &mut [f64]| -> f64 {
        let ajj = a[(j, j)];
        let old = beta[j];
        let new = if ajj > 0.0 { soft(ajj * old - grad[j], lambda) / ajj } else { 0.0 };
        let diff = new - old;
        if diff != 0.0 {
            beta[j] = new;
            for (g, &aj) in grad.iter_mut().zip(a.row(j)) {
                *g += aj * diff;
            }
        }
        diff.abs()
    };
    let mut active: Vec<usize> = Vec::new();
    for _ in 0..cfg.max_iter {
        for j in 0..p {
            update(j, beta, &mut grad);
        }
        if kkt_from_grad(beta, &grad, lambda) <= cfg.tol {
            return Ok(());
        }
        active.clear();
        active.extend((0..p).filter(|&j| beta[j] != 0.0));
        // settle the active set before the next full pass
        for _ in 0..cfg.max_iter {
            let mut moved = 0.0f64;
            for &j in &active {
                moved = moved.max(update(j, beta, &mut grad));
            }
            let active_kkt = active
                .iter()
                .map(|&j| if beta[j] == 0.0 { 0.0 } else { (grad[j] + lambda * beta[j].signum()).abs() })
                .fold(0.0, f64::max);
            if moved == 0.0 || active_kkt <= 0.1 * cfg.tol {
                break;
            }
        }
    }
    if kkt_from_grad(beta, &grad, lambda) <= cfg.tol {
        Ok(())
    } else {
        Err(Error::NoConvergence { iterations: cfg.max_iter })
    }
}

/// Minimizer of `(1/2)βᵗAβ − rᵗβ + λ‖β‖₁`.
pub fn lasso_cd(a: &Matrix, r: &[f64], lambda: f64, cfg: &LassoConfig) -> Result<Vec<f64>> {
    check(a, r, lambda)?;
    let mut beta = vec![0.0; r.len()];
    lasso_in_place(a, r, lambda, &mut beta, cfg)?;
    Ok(beta)
}

/// Solutions for every `λ` in `lambdas`, warm-started in the given order.
pub fn lasso_path(a: &Matrix, r: &[f64], lambdas: &[f64], cfg: &LassoConfig) -> Result<Vec<Vec<f64>>> {
    let mut beta = vec![0.0; r.len()];
    let mut out = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        check(a, r, l)?;
        lasso_in_place(a, r, l, &mut beta, cfg)?;
        out.push(beta.clone());
    }
    Ok(out)
}

fn check(a: &Matrix, r: &[f64], lambda: f64) -> Result<()> {
    if !a.is_square() || a.rows() != r.len() {
        return Err(Error::Dimension(format!("Gram matrix {}x{} with {} linear terms", a.rows(), a.cols(), r.len())));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("lambda must be a finite nonnegative number, got {lambda}")));
    }
    Ok(())
}
