use super::delta::{objective_change, optimal_delta, trace_changes, DirectionForms, SdpTerms, StepContext};
use super::{check_inputs, solve_equi, Alternation, Method, SMatrix, Solution, SolveReport, SolverConfig};
use crate::error::{Error, Result};
use crate::grouping::GroupPartition;
use crate::linalg::{cholesky_factorize, dot, lambda_min, quadratic_forms, sym_eigen, CholeskyFactor, Matrix, Rank1};

/// Minimize the method's loss over group-block-diagonal `S`.
///
/// Starts from half the equicorrelated solution. Each sweep runs a PCA pass
/// (steps along the eigenvectors of every group block of `Σ`, then along the
/// standard basis) and a coordinate pass over every within-group pair, as
/// selected by `config.alternation`. Every step is clamped to its feasible
/// interval and skipped unless it lowers the objective, so the objective
/// trace is nonincreasing. The solve stops when the relative objective
/// change of a sweep is at most `tol`, when no entry moved by `min_change`,
/// or after `max_sweeps`.
pub fn solve_group_knockoffs(
    sigma: &Matrix,
    partition: &GroupPartition,
    config: &SolverConfig,
) -> Result<Solution> {
    check_inputs(sigma, partition)?;
    config.validate()?;
    let init = solve_equi(sigma, partition, config.m)?;
    if config.method == Method::Equi {
        let s = init.to_dense();
        let d = sigma.scaled(config.scale()).sub(&s);
        let obj = super::objective(sigma, &s, partition, config.m, Method::Sdp)?;
        let report = SolveReport {
            method: Method::Equi,
            m: config.m,
            sweeps: 0,
            converged: true,
            objective_trace: vec![obj],
            drift: Vec::new(),
            rejected_steps: 0,
            lambda_min_s: lambda_min(&s),
            lambda_min_d: lambda_min(&d),
        };
        return Ok(Solution { s: init, report });
    }

    let s0 = init.to_dense().scaled(0.5);
    let mut st = State::new(sigma, partition, config, s0)?;
    let directions = pca_directions(sigma, partition);

    let mut trace = vec![st.objective()?];
    let mut drift = Vec::new();
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < config.max_sweeps {
        st.max_change = 0.0;
        if config.alternation != Alternation::CdOnly {
            for dir in &directions {
                st.pca_step(dir)?;
            }
        }
        if config.alternation != Alternation::PcaOnly {
            for g in 0..partition.num_groups() {
                let members = partition.members(g);
                for a in 0..members.len() {
                    for b in a..members.len() {
                        st.pair_step(members[a], members[b], members.len())?;
                    }
                }
            }
        }
        sweeps += 1;
        if sweeps % config.check_every == 0 {
            let dev = st.refactorize()?;
            drift.push((sweeps, dev));
            if dev > config.drift_tol {
                return Err(Error::FactorizationDrift { sweep: sweeps, deviation: dev });
            }
        }
        let obj = st.objective()?;
        let prev = *trace.last().unwrap();
        trace.push(obj);
        let rel = (obj - prev).abs() / prev.abs().max(f64::MIN_POSITIVE);
        if rel <= config.tol || st.max_change < config.min_change {
            converged = true;
            break;
        }
    }

    let s = st.s;
    let d = sigma.scaled(config.scale()).sub(&s);
    let report = SolveReport {
        method: config.method,
        m: config.m,
        sweeps,
        converged,
        objective_trace: trace,
        drift,
        rejected_steps: st.rejected,
        lambda_min_s: lambda_min(&s),
        lambda_min_d: lambda_min(&d),
    };
    Ok(Solution { s: SMatrix::from_dense(&s, partition), report })
}

/// A PCA direction supported on one group.
struct Direction {
    group: usize,
    /// Coefficients over the group's members.
    coef: Vec<f64>,
}

fn pca_directions(sigma: &Matrix, partition: &GroupPartition) -> Vec<Direction> {
    let mut dirs = Vec::new();
    for (g, members) in partition.groups().iter().enumerate() {
        if members.len() < 2 {
            continue;
        }
        let eig = sym_eigen(&sigma.principal(members));
        for k in 0..members.len() {
            dirs.push(Direction { group: g, coef: eig.vectors.column(k) });
        }
    }
    for (g, members) in partition.groups().iter().enumerate() {
        for a in 0..members.len() {
            let mut coef = vec![0.0; members.len()];
            coef[a] = 1.0;
            dirs.push(Direction { group: g, coef });
        }
    }
    dirs
}

struct State<'a> {
    sigma: &'a Matrix,
    partition: &'a GroupPartition,
    config: &'a SolverConfig,
    m: f64,
    s: Matrix,
    ls: CholeskyFactor,
    ld: CholeskyFactor,
    max_change: f64,
    rejected: usize,
    /// Tracked `tr(S⁻¹)`, `tr(D⁻¹)` and their cap, when the guard is active.
    traces: Option<(f64, f64, f64)>,
    scratch_r: Vec<f64>,
    scratch_x: Vec<f64>,
}

impl<'a> State<'a> {
    fn new(sigma: &'a Matrix, partition: &'a GroupPartition, config: &'a SolverConfig, s: Matrix) -> Result<Self> {
        let ls = cholesky_factorize(&s)?;
        let ld = cholesky_factorize(&sigma.scaled(config.scale()).sub(&s))?;
        let traces = matches!(config.method, Method::Sdp | Method::Mvr).then(|| {
            (inverse_trace(&ls), inverse_trace(&ld), s.rows() as f64 / config.cond_floor)
        });
        Ok(State {
            sigma,
            partition,
            config,
            m: config.m as f64,
            s,
            ls,
            ld,
            max_change: 0.0,
            rejected: 0,
            traces,
            scratch_r: Vec::new(),
            scratch_x: Vec::new(),
        })
    }

    fn second_order(&self) -> bool {
        self.traces.is_some()
    }

    /// Shorten `δ` until neither traced inverse exceeds its cap. The
    /// objectives are convex along a step, so shorter steps still improve.
    fn guard(traces: &mut Option<(f64, f64, f64)>, ctx: &StepContext, mut delta: f64) -> f64 {
        let Some((ts, td, cap)) = *traces else {
            return delta;
        };
        let (cap_s, cap_d) = (cap.max(ts), cap.max(td));
        for _ in 0..60 {
            let (dts, dtd) = trace_changes(ctx, delta);
            if ts + dts <= cap_s && td + dtd <= cap_d {
                *traces = Some((ts + dts, td + dtd, cap));
                return delta;
            }
            delta *= 0.5;
        }
        0.0
    }

    fn reset_traces(&mut self) {
        if let Some((_, _, cap)) = self.traces {
            self.traces = Some((inverse_trace(&self.ls), inverse_trace(&self.ld), cap));
        }
    }

    fn objective(&self) -> Result<f64> {
        Ok(match self.config.method {
            Method::Me => -(self.ld.logdet() + self.m * self.ls.logdet()),
            Method::Mvr => {
                self.m * self.m * inverse_trace(&self.ls) + inverse_trace(&self.ld)
            }
            Method::Sdp | Method::Equi => {
                super::objective(self.sigma, &self.s, self.partition, self.config.m, Method::Sdp)?
            }
        })
    }

    fn pair_step(&mut self, i: usize, j: usize, group_size: usize) -> Result<()> {
        let weight = 1.0 / (group_size * group_size) as f64;
        let residual = self.sigma[(i, j)] - self.s[(i, j)];
        let forms = quadratic_forms(&self.ld, &self.ls, i, j, self.second_order());
        let ctx = if i == j {
            let (c, d) = forms.second.map_or((0.0, 0.0), |so| (so.c_jj, so.d_jj));
            StepContext::Diag {
                forms: DirectionForms { a: forms.a_jj, b: forms.b_jj, c, d },
                residual,
                weight,
            }
        } else {
            StepContext::OffDiag { forms, residual, weight }
        };
        let interval = ctx.interval(self.config.eps);
        let delta = optimal_delta(self.config.method, &ctx, self.m, interval, self.config);
        let delta = if delta == 0.0 { 0.0 } else { Self::guard(&mut self.traces, &ctx, delta) };
        // rounding can leave a tiny step that does not lower the objective
        if delta == 0.0 || !(objective_change(self.config.method, &ctx, self.m, delta) < 0.0) {
            return Ok(());
        }
        let p = self.s.rows();
        let ok = if i == j {
            let mut w = vec![0.0; p];
            w[i] = delta.abs().sqrt();
            self.apply_direction(&w, delta > 0.0)
        } else {
            let h = (delta.abs() / 2.0).sqrt();
            let mut u = vec![0.0; p];
            let mut v = vec![0.0; p];
            u[i] = h;
            u[j] = h;
            v[i] = h;
            v[j] = -h;
            // S + δH = S + (δ/2)uuᵗ − (δ/2)vvᵗ and D − δH the reverse; the u term goes first
            let (s_u, s_v, d_u, d_v) = if delta > 0.0 {
                (Rank1::Update, Rank1::Downdate, Rank1::Downdate, Rank1::Update)
            } else {
                (Rank1::Downdate, Rank1::Update, Rank1::Update, Rank1::Downdate)
            };
            self.ls.rank1(&u, s_u).is_ok()
                && self.ls.rank1(&v, s_v).is_ok()
                && self.ld.rank1(&u, d_u).is_ok()
                && self.ld.rank1(&v, d_v).is_ok()
        };
        if !ok {
            return self.recover();
        }
        self.s[(i, j)] += delta;
        if i != j {
            self.s[(j, i)] += delta;
        }
        self.max_change = self.max_change.max(delta.abs());
        Ok(())
    }

    fn pca_step(&mut self, dir: &Direction) -> Result<()> {
        let p = self.s.rows();
        let members = self.partition.members(dir.group);
        let mut v = vec![0.0; p];
        for (&i, &c) in members.iter().zip(&dir.coef) {
            v[i] = c;
        }
        let ud = self.ld.half_solve(&v);
        let us = self.ls.half_solve(&v);
        let a = dot(&ud, &ud);
        let b = dot(&us, &us);
        let (c, d) = if self.second_order() {
            let mut xs = us;
            let mut xd = ud;
            self.ls.solve_upper_in_place(&mut xs);
            self.ld.solve_upper_in_place(&mut xd);
            (dot(&xs, &xs), dot(&xd, &xd))
        } else {
            (0.0, 0.0)
        };
        let k = members.len();
        let sdp = matches!(self.config.method, Method::Sdp);
        self.scratch_r.clear();
        self.scratch_x.clear();
        if sdp {
            for (ia, &i) in members.iter().enumerate() {
                for (jb, &j) in members.iter().enumerate() {
                    self.scratch_r.push(self.sigma[(i, j)] - self.s[(i, j)]);
                    self.scratch_x.push(dir.coef[ia] * dir.coef[jb]);
                }
            }
        }
        let forms = DirectionForms { a, b, c, d };
        let ctx = StepContext::Pca {
            forms,
            sdp: SdpTerms {
                residual: &self.scratch_r,
                outer: &self.scratch_x,
                weight: 1.0 / (k * k) as f64,
            },
        };
        let interval = ctx.interval(self.config.eps);
        let delta = optimal_delta(self.config.method, &ctx, self.m, interval, self.config);
        let delta = if delta == 0.0 { 0.0 } else { Self::guard(&mut self.traces, &ctx, delta) };
        // rounding can leave a tiny step that does not lower the objective
        if delta == 0.0 || !(objective_change(self.config.method, &ctx, self.m, delta) < 0.0) {
            return Ok(());
        }
        let w: Vec<f64> = v.iter().map(|x| x * delta.abs().sqrt()).collect();
        if !self.apply_direction(&w, delta > 0.0) {
            return self.recover();
        }
        let mut moved: f64 = 0.0;
        for (ia, &i) in members.iter().enumerate() {
            for (jb, &j) in members.iter().enumerate().take(ia + 1) {
                let change = delta * (dir.coef[ia] * dir.coef[jb]);
                self.s[(i, j)] += change;
                if i != j {
                    self.s[(j, i)] += change;
                }
                moved = moved.max(change.abs());
            }
        }
        self.max_change = self.max_change.max(moved);
        Ok(())
    }

    /// `S ± wwᵗ` and `D ∓ wwᵗ`.
    fn apply_direction(&mut self, w: &[f64], grow_s: bool) -> bool {
        let (ds, dd) = if grow_s { (Rank1::Update, Rank1::Downdate) } else { (Rank1::Downdate, Rank1::Update) };
        self.ls.rank1(w, ds).is_ok() && self.ld.rank1(w, dd).is_ok()
    }

    /// Rebuild both factors from the current `S` after a failed step.
    fn recover(&mut self) -> Result<()> {
        self.rejected += 1;
        let d = self.sigma.scaled(self.config.scale()).sub(&self.s);
        match (cholesky_factorize(&self.s), cholesky_factorize(&d)) {
            (Ok(ls), Ok(ld)) => {
                self.ls = ls;
                self.ld = ld;
                self.reset_traces();
                Ok(())
            }
            _ => Err(Error::SingularState),
        }
    }

    /// Swap in fresh factors; returns the larger Frobenius deviation.
    fn refactorize(&mut self) -> Result<f64> {
        let mut s = self.s.clone();
        s.symmetrize();
        let fresh_s = cholesky_factorize(&s)?;
        let fresh_d = cholesky_factorize(&self.sigma.scaled(self.config.scale()).sub(&s))?;
        let dev = self.ls.distance(&fresh_s).max(self.ld.distance(&fresh_d));
        self.ls = fresh_s;
        self.ld = fresh_d;
        self.reset_traces();
        Ok(dev)
    }
}

/// `tr(A⁻¹) = ‖L⁻¹‖²_F`.
pub(super) fn inverse_trace(l: &CholeskyFactor) -> f64 {
    let n = l.order();
    let mut total = 0.0;
    let mut e = vec![0.0; n];
    for i in 0..n {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[i] = 1.0;
        l.solve_lower_in_place(&mut e);
        total += dot(&e[i..], &e[i..]);
    }
    total
}
