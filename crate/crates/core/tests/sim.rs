mod common;

use common::*;
use groupko::grouping::GroupPartition;
use groupko::linalg::{sample_covariance, Matrix};
use groupko::sim::{gen_cov, gen_data, run_experiment, CovKind, CovParams, Placement, ScenarioSpec};
use groupko::solver::{solve_group_knockoffs, Method, SolverConfig};
use proptest::prelude::*;
use std::time::Instant;

const KINDS: [CovKind; 6] =
    [CovKind::Block, CovKind::ErCov, CovKind::ErPrec, CovKind::Ar1, CovKind::Ar1Corr, CovKind::Toeplitz];

#[test]
fn toeplitz_entries() {
    let s = gen_cov(CovKind::Toeplitz, 4, &CovParams::default(), 1).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            assert!((s[(i, j)] - 0.9f64.powi((i as i32 - j as i32).abs())).abs() < 1e-12);
        }
    }
}

#[test]
fn block_entries() {
    let s = gen_cov(CovKind::Block, 15, &CovParams::default(), 1).unwrap();
    assert_eq!(s[(0, 4)], 0.75);
    assert_eq!(s[(0, 5)], 0.1875);
    assert_eq!(s[(14, 10)], 0.75);
    assert!(s.has_unit_diagonal(0.0));
}

#[test]
fn kind_names_roundtrip() {
    for kind in KINDS {
        assert_eq!(kind.name().parse::<CovKind>().unwrap(), kind);
    }
}

#[test]
fn data_covariance_matches() {
    let sigma = ar1(5, 0.6);
    let d = gen_data(&sigma, 100_000, 2, 1.0, Placement::Random, 3).unwrap();
    assert!(sample_covariance(&d.x).unwrap().max_abs_diff(&sigma) < 0.02);
    assert_eq!(d.causal.len(), 2);
    assert!(d.causal.iter().all(|&c| d.beta[c] != 0.0));
}

#[test]
fn data_without_signal() {
    let sigma = ar1(6, 0.3);
    let d = gen_data(&sigma, 50, 0, 1.0, Placement::Random, 4).unwrap();
    assert!(d.beta.iter().all(|&b| b == 0.0));
    assert!(d.causal.is_empty());
    assert_eq!(d.y.len(), 50);
}

#[test]
fn contiguous_placement_is_a_run() {
    for seed in 0..20 {
        let d = gen_data(&ar1(30, 0.5), 10, 7, 1.0, Placement::Contiguous, seed).unwrap();
        let mut c = d.causal.clone();
        c.sort_unstable();
        assert!(c.windows(2).all(|w| w[1] == w[0] + 1));
    }
}

#[test]
fn data_deterministic() {
    let sigma = ar1(8, 0.5);
    let a = gen_data(&sigma, 30, 3, 1.0, Placement::Random, 9).unwrap();
    let b = gen_data(&sigma, 30, 3, 1.0, Placement::Random, 9).unwrap();
    assert_eq!((a.x, a.y, a.beta), (b.x, b.y, b.beta));
}

fn small_spec() -> ScenarioSpec {
    let mut spec = ScenarioSpec::new(CovKind::Ar1, 40, 200, 5);
    spec.replicates = 4;
    spec.report_timing = false;
    spec.effect_sd = 0.5;
    spec
}

#[test]
fn experiments_are_byte_stable() {
    let spec = small_spec();
    let a = run_experiment(&spec).unwrap();
    let b = run_experiment(&spec).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.replicates_csv(), b.replicates_csv());
    assert!(a.to_csv().starts_with("metric,mean,se,replicates,failed\n"));
    let mut other = spec.clone();
    other.seed = 2;
    assert_ne!(run_experiment(&other).unwrap().replicates_csv(), a.replicates_csv());
}

#[test]
fn key_path_runs() {
    let mut spec = small_spec();
    spec.c = 0.5;
    let res = run_experiment(&spec).unwrap();
    assert!(res.failures.is_empty());
    assert_eq!(res.replicates.len(), 4);
}

#[test]
fn no_signal_rarely_selects() {
    let mut spec = ScenarioSpec::new(CovKind::Ar1, 40, 200, 0);
    spec.replicates = 50;
    spec.report_timing = false;
    let res = run_experiment(&spec).unwrap();
    assert!(res.failures.is_empty());
    // with no causal groups every nonempty selection has FDP 1
    for r in &res.replicates {
        assert_eq!(r.fdp, if r.selected > 0 { 1.0 } else { 0.0 });
    }
    let (fdr, se) = res.fdr();
    assert!(fdr <= 0.1 + 3.0 * se.max(0.1 / 50f64.sqrt()), "fdr {fdr} se {se}");
}

#[test]
fn spec_file_parsing() {
    let spec = ScenarioSpec::parse("cov_kind=ar1_corr\n# comment\np=50\nn = 100\nk=5\nmethod=mvr\nm=2\nreplicates=3 # trailing\n").unwrap();
    assert_eq!((spec.p, spec.n, spec.k, spec.m, spec.replicates), (50, 100, 5, 2, 3));
    assert_eq!(spec.method, Method::Mvr);
    assert_eq!(spec.placement, Placement::Contiguous);
    assert!(ScenarioSpec::parse("bogus=1").is_err());
    assert!(ScenarioSpec::parse("p=10\nk=20").is_err());
    assert!(ScenarioSpec::parse("p=ten").is_err());
}

#[test]
fn solve_time_grows_with_p() {
    let times: Vec<f64> = [100, 200, 400]
        .iter()
        .map(|&p| {
            let sigma = ar1(p, 0.5);
            let part = GroupPartition::contiguous_blocks(p, 5);
            let t = Instant::now();
            solve_group_knockoffs(&sigma, &part, &SolverConfig::new(Method::Me, 1)).unwrap();
            t.elapsed().as_secs_f64()
        })
        .collect();
    // generous slack: this is a sanity check on a shared machine
    assert!(times[0] <= 1.5 * times[1] && times[1] <= 1.5 * times[2], "{times:?}");
    assert!(times[0] < times[2]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn generated_covariances_are_valid(ki in 0usize..6, p in 2usize..80, seed in 0u64..10_000) {
        let s: Matrix = gen_cov(KINDS[ki], p, &CovParams::default(), seed).unwrap();
        prop_assert!(s.has_unit_diagonal(1e-12));
        prop_assert!(s.is_symmetric(0.0));
        prop_assert!(min_eig(&s) >= 0.0009, "{}", min_eig(&s));
    }

    #[test]
    fn fdp_uses_group_nulls(seed in 0u64..1000) {
        let mut spec = small_spec();
        spec.replicates = 1;
        spec.seed = seed;
        let res = run_experiment(&spec).unwrap();
        let r = &res.replicates[0];
        prop_assert!((0.0..=1.0).contains(&r.fdp) && (0.0..=1.0).contains(&r.power));
        if r.selected == 0 {
            prop_assert_eq!(r.fdp, 0.0);
        }
    }
}
