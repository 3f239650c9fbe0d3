//! One-dimensional updates `S ← S + δ·H`.
//!
//! `H` is `eⱼeⱼᵗ` (diagonal step), `eᵢeⱼᵗ + eⱼeᵢᵗ` (off-diagonal step) or `vvᵗ`
//! (PCA step). Every quantity here is expressed through the quadratic forms
//! of `D⁻¹`, `S⁻¹` (and `D⁻²`, `S⁻²` for MVR), so the objective change of a
//! step is known in closed form.

use super::brent::brent_minimize;
use super::{Method, SolverConfig};
use crate::linalg::QuadraticForms;

/// Step range keeping `S` and `D` positive definite; always contains 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeasibleInterval {
    pub lo: f64,
    pub hi: f64,
}

impl FeasibleInterval {
    /// Pull both ends inward by `eps`, never past 0.
    pub fn shrunk(lo: f64, hi: f64, eps: f64) -> Self {
        FeasibleInterval { lo: (lo + eps).min(0.0), hi: (hi - eps).max(0.0) }
    }

    /// `vᵗD⁻¹v = a`, `vᵗS⁻¹v = b`: `[−1/b, 1/a]`.
    pub fn direction(a: f64, b: f64, eps: f64) -> Self {
        FeasibleInterval::shrunk(-1.0 / b, 1.0 / a, eps)
    }

    /// Off-diagonal pair: both determinants stay positive, and so do the
    /// half-steps of the rank-2 factor update, which apply the
    /// `(eᵢ + eⱼ)` term first.
    pub fn off_diag(f: &QuadraticForms, eps: f64) -> Self {
        let ra = (f.a_ii * f.a_jj).sqrt();
        let rb = (f.b_ii * f.b_jj).sqrt();
        // det(D − δH)/det D = (1 − δa_ij)² − δ²a_ii a_jj, roots 1/(a_ij ± ra)
        let d_lo = 1.0 / (f.a_ij - ra);
        let d_hi = 1.0 / (f.a_ij + ra);
        // det(S + δH)/det S = (1 + δb_ij)² − δ²b_ii b_jj, roots −1/(b_ij ± rb)
        let s_lo = -1.0 / (f.b_ij + rb);
        let s_hi = 1.0 / (rb - f.b_ij);
        let half_lo = -2.0 / (f.b_ii + 2.0 * f.b_ij + f.b_jj);
        let half_hi = 2.0 / (f.a_ii + 2.0 * f.a_ij + f.a_jj);
        let lo = d_lo.max(s_lo).max(half_lo);
        let hi = d_hi.min(s_hi).min(half_hi);
        FeasibleInterval::shrunk(lo, hi, eps)
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_pinned(&self) -> bool {
        self.lo == 0.0 && self.hi == 0.0
    }
}

/// Forms of a direction `v`: `a = vᵗD⁻¹v`, `b = vᵗS⁻¹v`, and for MVR
/// `c = vᵗS⁻²v`, `d = vᵗD⁻²v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionForms {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// The SDP loss restricted to one group: `w·Σ_k |r_k − δ·x_k|` with
/// `r = Σ − S` and `x` the entries of `H` over the block.
#[derive(Clone, Copy, Debug)]
pub struct SdpTerms<'a> {
    pub residual: &'a [f64],
    pub outer: &'a [f64],
    pub weight: f64,
}

#[derive(Clone, Copy, Debug)]
pub enum StepContext<'a> {
    /// `H = eⱼeⱼᵗ`; `residual = Σ_jj − S_jj`, `weight = 1/|A_γ|²`.
    Diag { forms: DirectionForms, residual: f64, weight: f64 },
    /// `H = eᵢeⱼᵗ + eⱼeᵢᵗ`; `residual = Σ_ij − S_ij`.
    OffDiag { forms: QuadraticForms, residual: f64, weight: f64 },
    /// `H = vvᵗ` with `v` supported on one group.
    Pca { forms: DirectionForms, sdp: SdpTerms<'a> },
}

impl StepContext<'_> {
    pub fn interval(&self, eps: f64) -> FeasibleInterval {
        match self {
            StepContext::Diag { forms, .. } | StepContext::Pca { forms, .. } => {
                FeasibleInterval::direction(forms.a, forms.b, eps)
            }
            StepContext::OffDiag { forms, .. } => FeasibleInterval::off_diag(forms, eps),
        }
    }
}

fn ln_pos(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Change of the objective (lower is better) caused by the step `δ`.
///
/// ME reports the change of `−(logdet D + m·logdet S)`, MVR of
/// `m²·tr(S⁻¹) + tr(D⁻¹)`, SDP of the block absolute deviation. Steps leaving
/// the positive definite region give `+∞`.
pub fn objective_change(method: Method, ctx: &StepContext, m: f64, delta: f64) -> f64 {
    if delta == 0.0 {
        return 0.0;
    }
    match (method, ctx) {
        (Method::Me, StepContext::Diag { forms, .. } | StepContext::Pca { forms, .. }) => {
            let v = ln_pos(1.0 - delta * forms.a) + m * ln_pos(1.0 + delta * forms.b);
            -v
        }
        (Method::Me, StepContext::OffDiag { forms: f, .. }) => {
            let (det_d, det_s) = pair_dets(f, delta);
            -(ln_pos(det_d) + m * ln_pos(det_s))
        }
        (Method::Mvr, _) => {
            let (ts, td) = trace_changes(ctx, delta);
            m * m * ts + td
        }
        (Method::Sdp | Method::Equi, StepContext::Diag { residual, weight, .. }) => {
            weight * ((residual - delta).abs() - residual.abs())
        }
        (Method::Sdp | Method::Equi, StepContext::OffDiag { residual, weight, .. }) => {
            2.0 * weight * ((residual - delta).abs() - residual.abs())
        }
        (Method::Sdp | Method::Equi, StepContext::Pca { sdp, .. }) => {
            let mut s = 0.0;
            for (r, x) in sdp.residual.iter().zip(sdp.outer) {
                s += (r - delta * x).abs() - r.abs();
            }
            sdp.weight * s
        }
    }
}

/// Changes of `tr(S⁻¹)` and `tr(D⁻¹)` caused by the step `δ`, `+∞` outside
/// the positive definite region. Needs the second-order forms.
pub fn trace_changes(ctx: &StepContext, delta: f64) -> (f64, f64) {
    if delta == 0.0 {
        return (0.0, 0.0);
    }
    match ctx {
        StepContext::Diag { forms, .. } | StepContext::Pca { forms, .. } => {
            let ds = 1.0 + delta * forms.b;
            let dd = 1.0 - delta * forms.a;
            if !(ds > 0.0 && dd > 0.0) {
                return (f64::INFINITY, f64::INFINITY);
            }
            (-delta * forms.c / ds, delta * forms.d / dd)
        }
        StepContext::OffDiag { forms: f, .. } => {
            let so = f.second.expect("trace changes need second-order forms");
            let (det_d, det_s) = pair_dets(f, delta);
            if !(det_d > 0.0 && det_s > 0.0) {
                return (f64::INFINITY, f64::INFINITY);
            }
            // Woodbury on the rank-2 change; tr((I + δM_b)⁻¹ M_c) and the D analogue
            let tr_s = 2.0 * so.c_ij + delta * (2.0 * so.c_ij * f.b_ij - so.c_jj * f.b_ii - so.c_ii * f.b_jj);
            let tr_d = 2.0 * so.d_ij + delta * (so.d_jj * f.a_ii + so.d_ii * f.a_jj - 2.0 * so.d_ij * f.a_ij);
            (-delta * tr_s / det_s, delta * tr_d / det_d)
        }
    }
}

fn pair_dets(f: &QuadraticForms, delta: f64) -> (f64, f64) {
    let det_d = (1.0 - delta * f.a_ij).powi(2) - delta * delta * f.a_ii * f.a_jj;
    let det_s = (1.0 + delta * f.b_ij).powi(2) - delta * delta * f.b_ii * f.b_jj;
    (det_d, det_s)
}

/// Best step within `interval`; 0 when no step improves the objective.
pub fn optimal_delta(
    method: Method,
    ctx: &StepContext,
    m: f64,
    interval: FeasibleInterval,
    config: &SolverConfig,
) -> f64 {
    if interval.is_pinned() {
        return 0.0;
    }
    let brent = |f: &dyn Fn(f64) -> f64| {
        brent_minimize(f, interval.lo, interval.hi, config.brent_tol, config.brent_max_iter).0
    };
    let delta = match (method, ctx) {
        (Method::Me, StepContext::Diag { forms, .. } | StepContext::Pca { forms, .. }) => {
            interval.clamp((m * forms.b - forms.a) / ((m + 1.0) * forms.b * forms.a))
        }
        (Method::Mvr, StepContext::Diag { forms, .. } | StepContext::Pca { forms, .. }) => {
            interval.clamp(mvr_direction_root(forms, m))
        }
        (Method::Sdp | Method::Equi, StepContext::Diag { residual, .. })
        | (Method::Sdp | Method::Equi, StepContext::OffDiag { residual, .. }) => {
            interval.clamp(*residual)
        }
        (Method::Me | Method::Mvr, StepContext::OffDiag { .. })
        | (Method::Sdp | Method::Equi, StepContext::Pca { .. }) => {
            brent(&|d| objective_change(method, ctx, m, d))
        }
    };
    if !delta.is_finite() || objective_change(method, ctx, m, delta) > 0.0 {
        0.0
    } else {
        delta
    }
}

/// Stationary point of `−m²δc/(1+δb) + δd/(1−δa)`.
///
/// Setting the derivative to zero gives the quadratic
/// `δ²(b²d − a²m²c) + δ(2am²c + 2bd) + d − m²c = 0`, i.e.
/// `d(1+δb)² = m²c(1−δa)²`. Inside the positive definite region both
/// `1+δb` and `1−δa` are positive, so the relevant root is the one of
/// `√d(1+δb) = m√c(1−δa)`, and the objective is convex there.
fn mvr_direction_root(f: &DirectionForms, m: f64) -> f64 {
    let sc = m * f.c.sqrt();
    let sd = f.d.sqrt();
    (sc - sd) / (sd * f.b + sc * f.a)
}
