use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use groupko::grouping::{cluster_groups_hier, cluster_groups_id, select_key_variables};
use groupko::inference::{
    knockoff_w, lambda_grid, lasso_cd, multiple_knockoff_filter, pseudo_validate, selection_csv, GroupScores,
    LassoConfig,
};
use groupko::linalg::io::{read_matrix, read_vector, write_matrix};
use groupko::linalg::Matrix;
use groupko::sampler::{build_model, exchangeability_check, sample_knockoff_rows, ConditionalSampler};
use groupko::sim::{run_experiment, ScenarioSpec};
use groupko::solver::{solve_blockwise, solve_group_knockoffs, solve_with_key_ci, Method, SolverConfig};
use groupko::{GroupPartition, KeySelection, Linkage};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "groupko", version, about = "Second-order group knockoffs")]
struct Cli {
    /// Worker threads for parallel stages.
    #[arg(long, env = "GK_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Group variables by correlation.
    Groups(GroupsArgs),
    /// Select key variables in every group.
    Keys(KeysArgs),
    /// Solve for the S matrix.
    Solve(SolveArgs),
    /// Draw knockoffs for data rows or a z-score vector.
    Sample(SampleArgs),
    /// Lasso from a Gram matrix and linear term.
    Lasso(LassoArgs),
    /// Multiple-knockoff filter on group scores.
    Filter(FilterArgs),
    /// Run a simulation scenario.
    Simulate(SimulateArgs),
    /// Compare correlations of originals and knockoffs.
    CheckExchangeability(ExchangeArgs),
}

#[derive(Args)]
struct GroupsArgs {
    #[arg(long)]
    sigma: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    cutoff: f64,
    #[arg(long, default_value = "average")]
    linkage: String,
    /// Only merge neighbouring index ranges.
    #[arg(long)]
    contiguous: bool,
    /// Group around interpolative-decomposition centers instead, stopping at
    /// this residual variance.
    #[arg(long)]
    id_threshold: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KeysArgs {
    #[arg(long)]
    sigma: PathBuf,
    #[arg(long)]
    groups: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    c: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    sigma: PathBuf,
    #[arg(long)]
    groups: PathBuf,
    #[arg(long, default_value = "me")]
    method: String,
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Solve on these key variables and extend.
    #[arg(long)]
    keys: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_sweeps: usize,
    /// Split the covariance into independent blocks and solve them in parallel.
    #[arg(long)]
    blockwise: bool,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    sigma: PathBuf,
    #[arg(long)]
    s: PathBuf,
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Data rows (n × p) or a z-score vector (one value per line).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Sample through these key variables; needs --groups.
    #[arg(long, requires = "groups")]
    keys: Option<PathBuf>,
    #[arg(long)]
    groups: Option<PathBuf>,
}

#[derive(Args)]
struct LassoArgs {
    #[arg(long)]
    gram: PathBuf,
    #[arg(long)]
    r: PathBuf,
    #[arg(long, conflicts_with = "auto", required_unless_present = "auto")]
    lambda: Option<f64>,
    /// Choose lambda by pseudo-validation; needs --n.
    #[arg(long, requires = "n")]
    auto: bool,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 10)]
    grid_len: usize,
    #[arg(long, default_value_t = 0.01)]
    grid_ratio: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FilterArgs {
    /// g × (m+1) scores, originals in the first column.
    #[arg(long)]
    scores: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    q: f64,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Per-replicate table.
    #[arg(long)]
    replicates_out: Option<PathBuf>,
}

#[derive(Args)]
struct ExchangeArgs {
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    xt: PathBuf,
    #[arg(long)]
    groups: PathBuf,
    /// Paired correlations as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_groups(path: &Path) -> Result<GroupPartition> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(GroupPartition::parse(&text)?)
}

fn read_keys(path: &Path, part: &GroupPartition) -> Result<KeySelection> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(KeySelection::parse(&text, part)?)
}

fn load_matrix(path: &Path) -> Result<Matrix> {
    read_matrix(path).map_err(anyhow::Error::from).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn groups(a: GroupsArgs) -> Result<()> {
    let sigma = load_matrix(&a.sigma)?;
    sigma.check_symmetric("covariance")?;
    let part = match a.id_threshold {
        Some(t) => cluster_groups_id(&sigma, t, a.contiguous)?,
        None => {
            let linkage: Linkage = a.linkage.parse().map_err(|e: String| groupko::Error::InvalidInput(e))?;
            cluster_groups_hier(&sigma, a.cutoff, linkage, a.contiguous)
        }
    };
    emit(a.out.as_deref(), &part.to_file_string())
}

fn keys(a: KeysArgs) -> Result<()> {
    let sigma = load_matrix(&a.sigma)?;
    let part = read_groups(&a.groups)?;
    let sel = select_key_variables(&sigma, &part, a.c)?;
    emit(a.out.as_deref(), &sel.to_file_string())
}

fn solve(a: SolveArgs) -> Result<()> {
    let sigma = load_matrix(&a.sigma)?;
    let part = read_groups(&a.groups)?;
    let method: Method = a.method.parse()?;
    let mut cfg = SolverConfig::new(method, a.m);
    cfg.tol = a.tol;
    cfg.max_sweeps = a.max_sweeps;
    let (s, reports) = match &a.keys {
        Some(k) => {
            let sel = read_keys(k, &part)?;
            let sol = solve_with_key_ci(&sigma, &part, &sel, &cfg)?;
            (sol.s, vec![sol.report])
        }
        None if a.blockwise => solve_blockwise(&sigma, &part, &cfg)?,
        None => {
            let sol = solve_group_knockoffs(&sigma, &part, &cfg)?;
            (sol.s, vec![sol.report])
        }
    };
    write_matrix(&a.out, &s.to_dense())?;
    let mut report = String::new();
    for (b, r) in reports.iter().enumerate() {
        if reports.len() > 1 {
            report.push_str(&format!("[block {}]\n", b + 1));
        }
        report.push_str(&r.to_text());
    }
    let mut sidecar = a.out.clone().into_os_string();
    sidecar.push(".report.txt");
    fs::write(&sidecar, report).context("writing the solve report")?;
    Ok(())
}

fn sample(a: SampleArgs) -> Result<()> {
    let sigma = load_matrix(&a.sigma)?;
    let s = load_matrix(&a.s)?;
    let p = sigma.rows();
    let raw = load_matrix(&a.input)?;
    // a single column of length p is one z-score vector
    let x = if raw.cols() == p {
        raw
    } else if raw.cols() == 1 && raw.rows() == p {
        raw.transpose()
    } else {
        bail!(groupko::Error::Dimension(format!(
            "input is {}x{}, expected rows of length {p} or a vector of length {p}",
            raw.rows(),
            raw.cols()
        )));
    };
    let out = match (&a.keys, &a.groups) {
        (Some(k), Some(g)) => {
            let part = read_groups(g)?;
            let sel = read_keys(k, &part)?;
            let idx = sel.all_keys();
            let star = build_model(&sigma.principal(&idx), &s.principal(&idx), a.m)?;
            let sampler = ConditionalSampler::new(&sigma, &sel, star)?;
            let rows: Vec<f64> = (0..x.rows())
                .flat_map(|r| sampler.sample(x.row(r), groupko::rng::derive_seed(a.seed, r as u64)))
                .collect();
            Matrix::from_vec(x.rows(), a.m * p, rows)?
        }
        _ => sample_knockoff_rows(&x, &build_model(&sigma, &s, a.m)?, a.seed)?,
    };
    write_matrix(&a.out, &out)?;
    Ok(())
}

fn lasso(a: LassoArgs) -> Result<()> {
    let gram = load_matrix(&a.gram)?;
    let r = read_vector(&a.r).with_context(|| format!("reading {}", a.r.display()))?;
    let cfg = LassoConfig::default();
    let lambda = match (a.lambda, a.n) {
        (Some(l), _) if !a.auto => l,
        (_, Some(n)) => {
            let grid = lambda_grid(&r, a.grid_len, a.grid_ratio);
            let pv = pseudo_validate(&r, &gram, n, &grid, a.seed, &cfg)?;
            eprintln!("lambda={:e}", pv.lambda);
            pv.lambda
        }
        _ => bail!(groupko::Error::InvalidInput("--auto needs --n".into())),
    };
    let beta = lasso_cd(&gram, &r, lambda, &cfg)?;
    let text: String = beta.iter().map(|b| format!("{b:?}\n")).collect();
    emit(a.out.as_deref(), &text)
}

fn filter(a: FilterArgs) -> Result<()> {
    let m = load_matrix(&a.scores)?;
    if m.cols() != a.m + 1 {
        bail!(groupko::Error::Dimension(format!("scores have {} columns, expected m + 1 = {}", m.cols(), a.m + 1)));
    }
    if !(a.q > 0.0 && a.q < 1.0) {
        bail!(groupko::Error::InvalidInput("q must lie in (0, 1)".into()));
    }
    let scores = GroupScores::from_matrix(&m)?;
    let w = knockoff_w(&scores);
    let res = multiple_knockoff_filter(&w.w, &w.kappa, &w.t, a.q, a.m);
    emit(a.out.as_deref(), &selection_csv(&res))
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let text = fs::read_to_string(&a.spec).with_context(|| format!("reading {}", a.spec.display()))?;
    let spec = ScenarioSpec::parse(&text)?;
    let res = run_experiment(&spec)?;
    fs::write(&a.out, res.to_csv()).with_context(|| format!("writing {}", a.out.display()))?;
    if let Some(p) = &a.replicates_out {
        fs::write(p, res.replicates_csv()).with_context(|| format!("writing {}", p.display()))?;
    }
    for (r, e) in &res.failures {
        eprintln!("replicate {} failed: {e}", r + 1);
    }
    Ok(())
}

fn check_exchangeability(a: ExchangeArgs) -> Result<()> {
    let x = load_matrix(&a.x)?;
    let xt = load_matrix(&a.xt)?;
    let part = read_groups(&a.groups)?;
    let report = exchangeability_check(&x, &xt, &part)?;
    print!("{}", report.summary());
    if let Some(p) = &a.out {
        fs::write(p, report.to_csv()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global()?;
    }
    match cli.command {
        Command::Groups(a) => groups(a),
        Command::Keys(a) => keys(a),
        Command::Solve(a) => solve(a),
        Command::Sample(a) => sample(a),
        Command::Lasso(a) => lasso(a),
        Command::Filter(a) => filter(a),
        Command::Simulate(a) => simulate(a),
        Command::CheckExchangeability(a) => check_exchangeability(a),
    }
}

/// 2 for unreadable or inconsistent inputs, 3 for numerical failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<groupko::Error>() {
        Some(e) if !e.is_input_error() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
