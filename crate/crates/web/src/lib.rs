//! Browser demo: solve an `S` matrix, look at knockoff exchangeability, and
//! play with the multiple-knockoff filter.
//!
//! Exported functions return flat numeric arrays; each has a plain Rust
//! twin that the tests call natively.

use groupko::grouping::GroupPartition;
use groupko::inference::{knockoff_w, multiple_knockoff_filter, GroupScores};
use groupko::linalg::{cholesky_factorize, lambda_min, Matrix};
use groupko::rng::{fill_normal, seeded};
use groupko::sampler::{build_model, exchangeability_check, sample_knockoff_rows};
use groupko::solver::{solve_group_knockoffs, Method, SolverConfig};
use wasm_bindgen::prelude::*;

/// AR(1) correlation `ρ^|i−j|`.
pub fn ar1(p: usize, rho: f64) -> Matrix {
    Matrix::from_fn(p, p, |i, j| rho.powi((i as i32 - j as i32).abs()))
}

#[derive(Clone, Debug)]
pub struct SolveSummary {
    pub p: usize,
    /// Row-major `S`.
    pub s: Vec<f64>,
    /// Row-major `Σ`.
    pub sigma: Vec<f64>,
    pub objective_trace: Vec<f64>,
    pub lambda_min_s: f64,
    pub lambda_min_d: f64,
}

pub fn solve(p: usize, rho: f64, group_size: usize, method: &str, m: usize) -> Result<SolveSummary, String> {
    if p == 0 || p > 200 || group_size == 0 || m == 0 {
        return Err("need 1 ≤ p ≤ 200, group size ≥ 1 and m ≥ 1".into());
    }
    if !(0.0..1.0).contains(&rho) {
        return Err("rho must lie in [0, 1)".into());
    }
    let method: Method = method.parse().map_err(|e: groupko::Error| e.to_string())?;
    let sigma = ar1(p, rho);
    let part = GroupPartition::contiguous_blocks(p, group_size);
    let sol = solve_group_knockoffs(&sigma, &part, &SolverConfig::new(method, m)).map_err(|e| e.to_string())?;
    let s = sol.s.to_dense();
    let k = (m as f64 + 1.0) / m as f64;
    Ok(SolveSummary {
        p,
        lambda_min_s: lambda_min(&s),
        lambda_min_d: lambda_min(&sigma.scaled(k).sub(&s)),
        s: s.into_vec(),
        sigma: sigma.into_vec(),
        objective_trace: sol.report.objective_trace,
    })
}

/// Scatter data: `[original, knockoff, within]` triples for every ordered
/// pair, `within` being 1 for pairs in the same group.
pub fn exchangeability(
    p: usize,
    rho: f64,
    group_size: usize,
    method: &str,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    if n < 10 || n > 50_000 {
        return Err("n must lie in [10, 50000]".into());
    }
    let summary = solve(p, rho, group_size, method, 1)?;
    let sigma = Matrix::from_vec(p, p, summary.sigma).map_err(|e| e.to_string())?;
    let s = Matrix::from_vec(p, p, summary.s).map_err(|e| e.to_string())?;
    let model = build_model(&sigma, &s, 1).map_err(|e| e.to_string())?;
    let l = cholesky_factorize(&sigma).map_err(|e| e.to_string())?.lower();
    let mut z = vec![0.0; n * p];
    fill_normal(&mut seeded(seed), &mut z);
    let x = Matrix::from_vec(n, p, z).map_err(|e| e.to_string())?.matmul(&l.transpose());
    let xt = sample_knockoff_rows(&x, &model, seed.wrapping_add(1)).map_err(|e| e.to_string())?;
    let report = exchangeability_check(&x, &xt, &GroupPartition::contiguous_blocks(p, group_size))
        .map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(3 * (report.cross.len() + report.within.len()));
    for (pts, flag) in [(&report.cross, 0.0), (&report.within, 1.0)] {
        for pt in pts {
            out.extend_from_slice(&[pt.original, pt.knockoff, flag]);
        }
    }
    Ok(out)
}

/// Filter on a row-major `g × (m+1)` score table. Returns
/// `[τ, W₁, κ₁, T₁, selected₁, W₂, …]`.
pub fn filter(scores: &[f64], m: usize, q: f64) -> Result<Vec<f64>, String> {
    if m == 0 || scores.is_empty() || scores.len() % (m + 1) != 0 {
        return Err("scores must hold g rows of m + 1 values".into());
    }
    if !(q > 0.0 && q < 1.0) {
        return Err("q must lie in (0, 1)".into());
    }
    if scores.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err("scores must be finite and nonnegative".into());
    }
    let g = scores.len() / (m + 1);
    let table = Matrix::from_vec(g, m + 1, scores.to_vec()).map_err(|e| e.to_string())?;
    let gs = GroupScores::from_matrix(&table).map_err(|e| e.to_string())?;
    let w = knockoff_w(&gs);
    let res = multiple_knockoff_filter(&w.w, &w.kappa, &w.t, q, m);
    let mut out = vec![res.tau];
    for k in 0..g {
        out.extend_from_slice(&[res.w[k], res.kappa[k] as f64, res.t[k], f64::from(u8::from(res.selected.contains(&k)))]);
    }
    Ok(out)
}

/// `[p, λ_min(S), λ_min(D), sweeps, S (p²), Σ (p²), objective trace]`.
#[wasm_bindgen(js_name = solveDemo)]
pub fn solve_demo(p: usize, rho: f64, group_size: usize, method: &str, m: usize) -> Result<Vec<f64>, JsError> {
    let r = solve(p, rho, group_size, method, m).map_err(|e| JsError::new(&e))?;
    let mut out = vec![r.p as f64, r.lambda_min_s, r.lambda_min_d, r.objective_trace.len() as f64 - 1.0];
    out.extend(r.s);
    out.extend(r.sigma);
    out.extend(r.objective_trace);
    Ok(out)
}

#[wasm_bindgen(js_name = exchangeabilityDemo)]
pub fn exchangeability_demo(
    p: usize,
    rho: f64,
    group_size: usize,
    method: &str,
    n: usize,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    exchangeability(p, rho, group_size, method, n, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = filterDemo)]
pub fn filter_demo(scores: &[f64], m: usize, q: f64) -> Result<Vec<f64>, JsError> {
    filter(scores, m, q).map_err(|e| JsError::new(&e))
}
