use super::GroupPartition;
use crate::linalg::Matrix;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Linkage {
    Average,
    Single,
    Complete,
}

impl FromStr for Linkage {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "average" => Ok(Linkage::Average),
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            other => Err(format!("unknown linkage {other:?}")),
        }
    }
}

struct Cluster {
    size: usize,
}

/// Agglomerative clustering on `d_ij = 1 − |Σ_ij|`, cut at `1 − cutoff`.
///
/// Merges happen while the closest pair is at distance `≤ 1 − cutoff`. Equal
/// distances resolve to the pair with the smallest first members. With
/// `adjacency_constrained`, only neighbouring index ranges may merge.
pub fn cluster_groups_hier(
    sigma: &Matrix,
    cutoff: f64,
    linkage: Linkage,
    adjacency_constrained: bool,
) -> GroupPartition {
    let p = sigma.rows();
    let threshold = 1.0 - cutoff;
    let mut dist = Matrix::from_fn(p, p, |i, j| 1.0 - sigma[(i, j)].abs());
    // cluster slot k always holds the cluster whose smallest member is k
    let mut clusters: Vec<Option<Cluster>> =
        (0..p).map(|_| Some(Cluster { size: 1 })).collect();
    let mut label: Vec<usize> = (0..p).collect();

    // nearest partner with a larger slot, for the unconstrained search
    let mut nn: Vec<(f64, usize)> = vec![(f64::INFINITY, usize::MAX); p];
    let recompute = |a: usize, dist: &Matrix, clusters: &[Option<Cluster>]| {
        let mut best = (f64::INFINITY, usize::MAX);
        for b in a + 1..clusters.len() {
            if clusters[b].is_some() && dist[(a, b)] < best.0 {
                best = (dist[(a, b)], b);
            }
        }
        best
    };
    if !adjacency_constrained {
        for a in 0..p {
            nn[a] = recompute(a, &dist, &clusters);
        }
    }

    loop {
        let mut best = (f64::INFINITY, usize::MAX, usize::MAX);
        if adjacency_constrained {
            let mut prev: Option<usize> = None;
            for (k, c) in clusters.iter().enumerate() {
                if c.is_none() {
                    continue;
                }
                if let Some(a) = prev {
                    if dist[(a, k)] < best.0 {
                        best = (dist[(a, k)], a, k);
                    }
                }
                prev = Some(k);
            }
        } else {
            for (a, &(d, b)) in nn.iter().enumerate() {
                if clusters[a].is_some() && d < best.0 {
                    best = (d, a, b);
                }
            }
        }
        let (d, a, b) = best;
        if a == usize::MAX || d > threshold {
            break;
        }

        let ca = clusters[a].take().unwrap();
        let cb = clusters[b].take().unwrap();
        for k in 0..p {
            if k == a || k == b || clusters[k].is_none() {
                continue;
            }
            let (x, y) = (dist[(k, a)], dist[(k, b)]);
            let merged = match linkage {
                Linkage::Single => x.min(y),
                Linkage::Complete => x.max(y),
                Linkage::Average => {
                    (ca.size as f64 * x + cb.size as f64 * y) / (ca.size + cb.size) as f64
                }
            };
            dist[(k, a)] = merged;
            dist[(a, k)] = merged;
        }
        for l in label.iter_mut() {
            if *l == b {
                *l = a;
            }
        }
        clusters[a] = Some(Cluster { size: ca.size + cb.size });

        if !adjacency_constrained {
            nn[a] = recompute(a, &dist, &clusters);
            nn[b] = (f64::INFINITY, usize::MAX);
            for c in 0..p {
                if c == a || clusters[c].is_none() {
                    continue;
                }
                if nn[c].1 == a || nn[c].1 == b {
                    nn[c] = recompute(c, &dist, &clusters);
                } else if c < a && dist[(c, a)] <= nn[c].0 {
                    let cand = (dist[(c, a)], a);
                    if cand.0 < nn[c].0 || a < nn[c].1 {
                        nn[c] = cand;
                    }
                }
            }
        }
    }
    GroupPartition::from_labels(&label)
}
