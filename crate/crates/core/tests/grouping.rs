mod common;

use common::*;
use groupko::grouping::{
    cluster_groups_hier, cluster_groups_id, key_ratio, select_key_variables, GroupPartition, KeySelection, Linkage,
};
use groupko::linalg::{regularize_to_pd, Matrix};
use proptest::prelude::*;

/// Naive average linkage: recompute every cluster distance from scratch.
fn average_linkage_oracle(sigma: &Matrix, cutoff: f64) -> GroupPartition {
    let p = sigma.rows();
    let d = |i: usize, j: usize| 1.0 - sigma[(i, j)].abs();
    let mut clusters: Vec<Vec<usize>> = (0..p).map(|i| vec![i]).collect();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut total = 0.0;
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        total += d(i, j);
                    }
                }
                let avg = total / (clusters[a].len() * clusters[b].len()) as f64;
                if best.is_none_or(|(v, _, _)| avg < v) {
                    best = Some((avg, a, b));
                }
            }
        }
        match best {
            Some((v, a, b)) if v <= 1.0 - cutoff => {
                let moved = clusters.remove(b);
                clusters[a].extend(moved);
            }
            _ => break,
        }
    }
    let mut label = vec![0; p];
    for (k, c) in clusters.iter().enumerate() {
        for &i in c {
            label[i] = k;
        }
    }
    GroupPartition::from_labels(&label)
}

fn block_cov(p: usize, size: usize, rho: f64, gamma: f64) -> Matrix {
    Matrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else if i / size == j / size {
            rho
        } else {
            rho * gamma
        }
    })
}

#[test]
fn hier_identity_gives_singletons() {
    let part = cluster_groups_hier(&Matrix::identity(6), 0.5, Linkage::Average, false);
    assert_eq!(part, GroupPartition::singletons(6));
}

#[test]
fn hier_recovers_blocks() {
    let sigma = block_cov(15, 5, 0.75, 0.25);
    let part = cluster_groups_hier(&sigma, 0.5, Linkage::Average, false);
    assert_eq!(part, average_linkage_oracle(&sigma, 0.5));
    assert_eq!(part, GroupPartition::contiguous_blocks(15, 5));
}

#[test]
fn hier_merges_strong_pair() {
    let sigma = Matrix::from_rows(&[vec![1.0, 0.9], vec![0.9, 1.0]]).unwrap();
    for linkage in [Linkage::Average, Linkage::Single, Linkage::Complete] {
        assert_eq!(cluster_groups_hier(&sigma, 0.5, linkage, false).num_groups(), 1);
    }
}

#[test]
fn hier_adjacency_keeps_ranges() {
    // 0 and 2 are strongly tied but 1 sits between them
    let mut sigma = Matrix::identity(3);
    sigma[(0, 2)] = 0.9;
    sigma[(2, 0)] = 0.9;
    let free = cluster_groups_hier(&sigma, 0.5, Linkage::Average, false);
    assert_eq!(free.assignments(), &[0, 1, 0]);
    let adj = cluster_groups_hier(&sigma, 0.5, Linkage::Average, true);
    assert!(adj.is_contiguous());
    assert_eq!(adj.num_groups(), 3);
}

#[test]
fn id_identity_all_centers() {
    let part = cluster_groups_id(&Matrix::identity(5), 0.25, false).unwrap();
    assert_eq!(part, GroupPartition::singletons(5));
}

#[test]
fn id_twin_joins_center() {
    let mut sigma = Matrix::identity(3);
    sigma[(0, 1)] = 1.0 - 1e-9;
    sigma[(1, 0)] = 1.0 - 1e-9;
    let sigma = regularize_to_pd(&sigma, 1e-5);
    let part = cluster_groups_id(&sigma, 0.25, false).unwrap();
    assert_eq!(part.group_of(0), part.group_of(1));
    assert_eq!(part.num_groups(), 2);
}

#[test]
fn id_single_variable() {
    let part = cluster_groups_id(&Matrix::identity(1), 0.25, true).unwrap();
    assert_eq!(part.num_groups(), 1);
}

#[test]
fn id_contiguous_gives_ranges() {
    let part = cluster_groups_id(&ar1(40, 0.8), 0.5, true).unwrap();
    assert!(part.is_contiguous());
    assert!(part.num_groups() > 1 && part.num_groups() < 40);
}

#[test]
fn id_rejects_indefinite() {
    let sigma = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
    assert!(cluster_groups_id(&sigma, 0.25, false).is_err());
}

#[test]
fn keys_all_at_c_one() {
    let sigma = random_corr(12, 4);
    let part = GroupPartition::contiguous_blocks(12, 4);
    let sel = select_key_variables(&sigma, &part, 1.0).unwrap();
    assert_eq!(sel, KeySelection { threshold_c: Some(1.0), ..KeySelection::all(&part) });
    assert_eq!(sel.num_keys(), 12);
}

#[test]
fn keys_twin_pair() {
    let mut sigma = Matrix::identity(3);
    let set = |s: &mut Matrix, i: usize, j: usize, v: f64| {
        s[(i, j)] = v;
        s[(j, i)] = v;
    };
    set(&mut sigma, 0, 1, 0.999);
    set(&mut sigma, 0, 2, 0.1);
    set(&mut sigma, 1, 2, 0.1);
    let part = GroupPartition::new(vec![0, 0, 1]).unwrap();
    let sel = select_key_variables(&sigma, &part, 0.5).unwrap();
    assert_eq!(sel.keys[0].len(), 1);
    let (key, twin) = (sel.keys[0][0], sel.non_keys[0][0]);
    // η = Σ_jk², ζ from the 2x2 system of the other two variables
    let eta = sigma[(twin, key)].powi(2);
    let other = 2;
    let (a, b) = (sigma[(twin, key)], sigma[(twin, other)]);
    let r = sigma[(key, other)];
    let zeta = (a * a - 2.0 * a * b * r + b * b) / (1.0 - r * r);
    assert!(eta / zeta >= 0.5);
    let ratio = key_ratio(&sigma, &sel.keys[0], &sel.non_keys[0]).unwrap().unwrap();
    assert!((ratio - eta / zeta).abs() < 1e-12);
}

#[test]
fn keys_singleton_group() {
    let sigma = random_corr(4, 5);
    let part = GroupPartition::new(vec![0, 0, 1, 0]).unwrap();
    let sel = select_key_variables(&sigma, &part, 0.5).unwrap();
    assert_eq!(sel.keys[1], vec![2]);
    assert!(sel.non_keys[1].is_empty());
}

#[test]
fn true_keys_explain_everything() {
    // under exact conditional independence η_j = ζ_j for every non-key
    let (sigma, _, truth) = ci_structured(4, 5, 2, 6);
    for g in 0..4 {
        let r = key_ratio(&sigma, &truth.keys[g], &truth.non_keys[g]).unwrap().unwrap();
        assert!((r - 1.0).abs() < 1e-9, "group {g}: {r}");
    }
}

fn flip_signs(sigma: &Matrix, signs: &[bool]) -> Matrix {
    Matrix::from_fn(sigma.rows(), sigma.cols(), |i, j| {
        let (a, b) = (i.min(j), i.max(j));
        if i != j && signs[(a * 31 + b * 17) % signs.len()] {
            -sigma[(i, j)]
        } else {
            sigma[(i, j)]
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hier_ignores_sign_flips(p in 2usize..25, seed in 0u64..10_000, cutoff in 0.1f64..0.9,
                               signs in proptest::collection::vec(any::<bool>(), 1..40), adj in any::<bool>()) {
        let sigma = random_corr(p, seed);
        // symmetric entrywise sign pattern
        let flipped = flip_signs(&sigma, &signs);
        prop_assert!(flipped.is_symmetric(0.0));
        for linkage in [Linkage::Average, Linkage::Single, Linkage::Complete] {
            prop_assert_eq!(
                cluster_groups_hier(&sigma, cutoff, linkage, adj),
                cluster_groups_hier(&flipped, cutoff, linkage, adj)
            );
        }
    }

    #[test]
    fn hier_matches_naive_average_linkage(p in 2usize..20, seed in 0u64..10_000, cutoff in 0.05f64..0.8) {
        let sigma = random_corr(p, seed);
        prop_assert_eq!(cluster_groups_hier(&sigma, cutoff, Linkage::Average, false), average_linkage_oracle(&sigma, cutoff));
    }

    #[test]
    fn keys_grow_with_c(p in 4usize..20, size in 2usize..6, seed in 0u64..10_000, c1 in 0.0f64..1.0, c2 in 0.0f64..1.0) {
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        let sigma = random_corr(p, seed);
        let part = GroupPartition::contiguous_blocks(p, size);
        let a = select_key_variables(&sigma, &part, lo).unwrap();
        let b = select_key_variables(&sigma, &part, hi).unwrap();
        for g in 0..part.num_groups() {
            for k in &a.keys[g] {
                prop_assert!(b.keys[g].contains(k));
            }
        }
    }

    #[test]
    fn keys_meet_threshold(p in 4usize..20, size in 2usize..7, seed in 0u64..10_000, c in 0.0f64..1.0) {
        let sigma = random_corr(p, seed);
        let part = GroupPartition::contiguous_blocks(p, size);
        let sel = select_key_variables(&sigma, &part, c).unwrap();
        for g in 0..part.num_groups() {
            prop_assert!(!sel.keys[g].is_empty());
            if let Some(r) = key_ratio(&sigma, &sel.keys[g], &sel.non_keys[g]).unwrap() {
                prop_assert!(r >= c - 1e-10);
            }
        }
    }

    #[test]
    fn groups_file_roundtrip(labels in proptest::collection::vec(0u8..6, 1..30)) {
        let part = GroupPartition::from_labels(&labels);
        prop_assert_eq!(GroupPartition::parse(&part.to_file_string()).unwrap(), part);
    }
}
