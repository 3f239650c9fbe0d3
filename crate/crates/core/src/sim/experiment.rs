use super::cov::{gen_cov, CovKind, CovParams};
use super::data::{gen_data, Placement};
use crate::error::{Error, Result};
use crate::grouping::{cluster_groups_hier, select_key_variables, GroupPartition, Linkage};
use crate::inference::{
    group_scores, knockoff_w, lambda_grid, lasso_cd, multiple_knockoff_filter, power_fdr,
    pseudo_validate_with_noise, LassoConfig,
};
use crate::linalg::{corr_from_cov, regularize_to_pd, sample_covariance, Matrix};
use crate::rng::{derive_seed, fill_normal, seeded};
use crate::sampler::{build_model, sample_knockoff_rows, ConditionalSampler};
use crate::solver::{solve_group_knockoffs, solve_with_key_ci, Method, SolverConfig};
use std::fmt::Write as _;
use std::time::Instant;

/// One simulation scenario, read from flat `key=value` lines.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub cov_kind: CovKind,
    pub p: usize,
    pub n: usize,
    pub k: usize,
    pub effect_sd: f64,
    pub m: usize,
    pub method: Method,
    pub q: f64,
    /// Key threshold; `1.0` solves and samples on the full groups.
    pub c: f64,
    pub replicates: usize,
    pub seed: u64,
    /// Defaults to contiguous for `ar1_corr`, random otherwise.
    pub placement: Placement,
    pub cutoff: f64,
    pub lambda_grid: usize,
    /// Include solve times in the output. Off for byte-stable tables.
    pub report_timing: bool,
    pub cov: CovParams,
}

impl ScenarioSpec {
    pub fn new(cov_kind: CovKind, p: usize, n: usize, k: usize) -> Self {
        ScenarioSpec {
            cov_kind,
            p,
            n,
            k,
            effect_sd: 1.0,
            m: 1,
            method: Method::Me,
            q: 0.1,
            c: 1.0,
            replicates: 10,
            seed: 1,
            placement: if cov_kind == CovKind::Ar1Corr { Placement::Contiguous } else { Placement::Random },
            cutoff: 0.5,
            lambda_grid: 10,
            report_timing: true,
            cov: CovParams::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("line {}: expected key=value", lineno + 1)))?;
            pairs.push((lineno + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let kind = pairs
            .iter()
            .find(|(_, k, _)| k == "cov_kind")
            .map(|(_, _, v)| v.parse::<CovKind>())
            .transpose()
            .map_err(|e| Error::Format(e.to_string()))?
            .unwrap_or(CovKind::Ar1);
        let mut spec = ScenarioSpec::new(kind, 200, 800, 20);
        let mut placement_set = false;
        for (lineno, key, val) in &pairs {
            let bad = |what: &str| Error::Format(format!("line {lineno}: invalid {what} {val:?}"));
            macro_rules! num {
                ($t:ty) => {
                    val.parse::<$t>().map_err(|_| bad(key))?
                };
            }
            match key.as_str() {
                "cov_kind" => {}
                "p" => spec.p = num!(usize),
                "n" => spec.n = num!(usize),
                "k" => spec.k = num!(usize),
                "effect_sd" => spec.effect_sd = num!(f64),
                "m" => spec.m = num!(usize),
                "method" => spec.method = val.parse().map_err(|_| bad(key))?,
                "q" => spec.q = num!(f64),
                "c" => spec.c = num!(f64),
                "replicates" => spec.replicates = num!(usize),
                "seed" => spec.seed = num!(u64),
                "cutoff" => spec.cutoff = num!(f64),
                "lambda_grid" => spec.lambda_grid = num!(usize),
                "report_timing" => spec.report_timing = num!(bool),
                "block_size" => spec.cov.block_size = num!(usize),
                "rho" => spec.cov.rho = num!(f64),
                "gamma" => spec.cov.gamma = num!(f64),
                "toeplitz_rho" => spec.cov.toeplitz_rho = num!(f64),
                "placement" => {
                    placement_set = true;
                    spec.placement = match val.as_str() {
                        "random" => Placement::Random,
                        "contiguous" => Placement::Contiguous,
                        _ => return Err(bad(key)),
                    }
                }
                other => return Err(Error::Format(format!("line {lineno}: unknown key {other:?}"))),
            }
        }
        if !placement_set {
            spec.placement = ScenarioSpec::new(kind, 1, 1, 0).placement;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k > self.p {
            return Err(Error::InvalidInput(format!("k = {} exceeds p = {}", self.k, self.p)));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::InvalidInput("q must lie in (0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.c) {
            return Err(Error::InvalidInput("c must lie in [0, 1]".into()));
        }
        if self.m < 1 || self.p < 2 || self.n < 2 || self.replicates < 1 || self.lambda_grid < 1 {
            return Err(Error::InvalidInput("m, replicates and lambda_grid must be positive; p, n at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateResult {
    pub replicate: usize,
    pub power: f64,
    pub fdp: f64,
    pub selected: usize,
    pub groups: usize,
    pub lambda: f64,
    pub solve_seconds: f64,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub spec: ScenarioSpec,
    pub replicates: Vec<ReplicateResult>,
    /// `(replicate, message)` for every replicate that failed.
    pub failures: Vec<(usize, String)>,
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

impl ExperimentResult {
    pub fn power(&self) -> (f64, f64) {
        mean_se(&self.replicates.iter().map(|r| r.power).collect::<Vec<_>>())
    }

    pub fn fdr(&self) -> (f64, f64) {
        mean_se(&self.replicates.iter().map(|r| r.fdp).collect::<Vec<_>>())
    }

    pub fn solve_seconds(&self) -> (f64, f64) {
        mean_se(&self.replicates.iter().map(|r| r.solve_seconds).collect::<Vec<_>>())
    }

    /// Summary table `metric,mean,se,replicates,failed`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,mean,se,replicates,failed\n");
        let ok = self.replicates.len();
        let failed = self.failures.len();
        let mut row = |name: &str, (m, se): (f64, f64)| {
            writeln!(s, "{name},{m:.6},{se:.6},{ok},{failed}").unwrap();
        };
        row("power", self.power());
        row("fdr", self.fdr());
        row(
            "selected",
            mean_se(&self.replicates.iter().map(|r| r.selected as f64).collect::<Vec<_>>()),
        );
        if self.spec.report_timing {
            row("solve_seconds", self.solve_seconds());
        }
        s
    }

    /// One line per replicate, failures included.
    pub fn replicates_csv(&self) -> String {
        let mut s = String::from("replicate,power,fdp,selected,groups,lambda");
        if self.spec.report_timing {
            s.push_str(",solve_seconds");
        }
        s.push_str(",error\n");
        let mut lines: Vec<(usize, String)> = Vec::new();
        for r in &self.replicates {
            let mut line = format!("{},{:.6},{:.6},{},{},{:.6e}", r.replicate + 1, r.power, r.fdp, r.selected, r.groups, r.lambda);
            if self.spec.report_timing {
                write!(line, ",{:.6}", r.solve_seconds).unwrap();
            }
            line.push_str(",\n");
            lines.push((r.replicate, line));
        }
        for (rep, msg) in &self.failures {
            let blanks = if self.spec.report_timing { ",,,,,," } else { ",,,,," };
            lines.push((*rep, format!("{}{blanks}{}\n", rep + 1, msg.replace(',', ";"))));
        }
        lines.sort_by_key(|(r, _)| *r);
        for (_, l) in lines {
            s.push_str(&l);
        }
        s
    }
}

/// Run every replicate of `spec`. Replicate `r` draws from
/// `derive_seed(spec.seed, r)` only, so different methods see the same
/// covariance and data.
pub fn run_experiment(spec: &ScenarioSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let run = |r: usize| (r, run_replicate(spec, r));
    #[cfg(feature = "parallel")]
    let outcomes: Vec<(usize, Result<ReplicateResult>)> = {
        use rayon::prelude::*;
        (0..spec.replicates).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<(usize, Result<ReplicateResult>)> = (0..spec.replicates).map(run).collect();
    let mut replicates = Vec::new();
    let mut failures = Vec::new();
    for (r, out) in outcomes {
        match out {
            Ok(res) => replicates.push(res),
            Err(e) => failures.push((r, e.to_string())),
        }
    }
    Ok(ExperimentResult { spec: spec.clone(), replicates, failures })
}

/// Generate, group, solve, sample, fit and filter one replicate.
pub fn run_replicate(spec: &ScenarioSpec, replicate: usize) -> Result<ReplicateResult> {
    let seed = derive_seed(spec.seed, replicate as u64);
    let sigma = gen_cov(spec.cov_kind, spec.p, &spec.cov, derive_seed(seed, 0))?;
    let data = gen_data(&sigma, spec.n, spec.k, spec.effect_sd, spec.placement, derive_seed(seed, 1))?;
    let corr = corr_from_cov(&sample_covariance(&data.x)?)?;
    let partition = cluster_groups_hier(&corr, spec.cutoff, Linkage::Average, false);

    let (knockoffs, solve_seconds) = match knockoff_design(spec, &sigma, &partition, &data.x, seed) {
        Err(Error::NotPositiveDefinite { .. }) => {
            let fixed = regularize_to_pd(&sigma, 1e-5);
            knockoff_design(spec, &fixed, &partition, &data.x, seed)?
        }
        other => other?,
    };

    let n = spec.n;
    let p = spec.p;
    let cols = p * (spec.m + 1);
    let mut design = Matrix::zeros(n, cols);
    for r in 0..n {
        let row = design.row_mut(r);
        row[..p].copy_from_slice(data.x.row(r));
        row[p..].copy_from_slice(knockoffs.row(r));
    }
    let nf = n as f64;
    let a = design.gram().scaled(1.0 / nf);
    let r_stat: Vec<f64> = design.transpose().matvec(&data.y).iter().map(|v| v / nf).collect();
    // N(0, A) for the pseudo split as Zᵗξ/√n
    let mut xi = vec![0.0; n];
    fill_normal(&mut seeded(derive_seed(seed, 3)), &mut xi);
    let noise: Vec<f64> = design.transpose().matvec(&xi).iter().map(|v| v / nf.sqrt()).collect();
    let cfg = LassoConfig::default();
    let grid = lambda_grid(&r_stat, spec.lambda_grid, 0.01);
    let lambda = match pseudo_validate_with_noise(&r_stat, &a, n, &grid, &noise, &cfg) {
        Ok(pv) => pv.lambda,
        Err(Error::AllZeroPaths) => grid[grid.len() - 1],
        Err(e) => return Err(e),
    };
    let beta = lasso_cd(&a, &r_stat, lambda, &cfg)?;
    let scores = group_scores(&beta, &partition, spec.m)?;
    let w = knockoff_w(&scores);
    let sel = multiple_knockoff_filter(&w.w, &w.kappa, &w.t, spec.q, spec.m);
    let mut causal_groups: Vec<usize> = data.causal.iter().map(|&j| partition.group_of(j)).collect();
    causal_groups.dedup();
    let metrics = power_fdr(&sel.selected, &causal_groups, partition.num_groups());
    Ok(ReplicateResult {
        replicate,
        power: metrics.power,
        fdp: metrics.fdp,
        selected: sel.selected.len(),
        groups: partition.num_groups(),
        lambda,
        solve_seconds,
    })
}

/// Solve for `S` and draw the `n × mp` knockoff matrix.
fn knockoff_design(
    spec: &ScenarioSpec,
    sigma: &Matrix,
    partition: &GroupPartition,
    x: &Matrix,
    seed: u64,
) -> Result<(Matrix, f64)> {
    let config = SolverConfig::new(spec.method, spec.m);
    let sample_seed = derive_seed(seed, 2);
    if spec.c < 1.0 {
        let keys = select_key_variables(sigma, partition, spec.c)?;
        let start = Instant::now();
        let sol = solve_with_key_ci(sigma, partition, &keys, &config)?;
        let secs = start.elapsed().as_secs_f64();
        let idx = keys.all_keys();
        let star = build_model(&sigma.principal(&idx), &sol.s.to_dense().principal(&idx), spec.m)?;
        let sampler = ConditionalSampler::new(sigma, &keys, star)?;
        let rows: Vec<f64> = (0..x.rows())
            .flat_map(|r| sampler.sample(x.row(r), derive_seed(sample_seed, r as u64)))
            .collect();
        Ok((Matrix::from_vec(x.rows(), spec.m * spec.p, rows)?, secs))
    } else {
        let start = Instant::now();
        let sol = solve_group_knockoffs(sigma, partition, &config)?;
        let secs = start.elapsed().as_secs_f64();
        let model = build_model(sigma, &sol.s.to_dense(), spec.m)?;
        Ok((sample_knockoff_rows(x, &model, sample_seed)?, secs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_spec() {
        let s = ScenarioSpec::parse("cov_kind=ar1_corr\np=50\n# comment\nmethod=mvr\nreport_timing=false\n").unwrap();
        assert_eq!(s.cov_kind, CovKind::Ar1Corr);
        assert_eq!(s.placement, Placement::Contiguous);
        assert_eq!(s.p, 50);
        assert_eq!(s.method, Method::Mvr);
        assert!(!s.report_timing);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(ScenarioSpec::parse("p=abc"), Err(Error::Format(_))));
        assert!(matches!(ScenarioSpec::parse("colour=red"), Err(Error::Format(_))));
        assert!(ScenarioSpec::parse("q=1.5").is_err());
    }
}
