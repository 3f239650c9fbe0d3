use super::scores::GroupScores;
use std::collections::BTreeSet;
use std::fmt::Write as _;

/// `W`, the winner `κ` (0 for the original, `ℓ` for copy `ℓ`) and the
/// filter magnitude `T` of every group.
#[derive(Clone, Debug, PartialEq)]
pub struct WStatistics {
    pub w: Vec<f64>,
    pub kappa: Vec<usize>,
    pub t: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionResult {
    pub w: Vec<f64>,
    pub kappa: Vec<usize>,
    pub t: Vec<f64>,
    /// `+∞` when no threshold qualifies.
    pub tau: f64,
    /// 0-based selected groups, ascending.
    pub selected: Vec<usize>,
    pub q: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    pub power: f64,
    pub fdp: f64,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k == 0 {
        0.0
    } else if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// `W = (Z − median Z̃)·1{Z ≥ max Z̃}`; `κ` is 0 when the original ties or
/// beats every copy, else the 1-based first copy attaining the maximum;
/// `T` is the maximum of all `m+1` values minus the median of the rest.
pub fn knockoff_w(scores: &GroupScores) -> WStatistics {
    let g = scores.z.len();
    let mut out = WStatistics { w: Vec::with_capacity(g), kappa: Vec::with_capacity(g), t: Vec::with_capacity(g) };
    for (z, copies) in scores.z.iter().zip(&scores.z_tilde) {
        let mut best = 0usize;
        for (l, &c) in copies.iter().enumerate() {
            let cur = if best == 0 { *z } else { copies[best - 1] };
            if c > cur {
                best = l + 1;
            }
        }
        let mut rest: Vec<f64> = copies.clone();
        let top = if best == 0 {
            *z
        } else {
            rest[best - 1] = *z;
            copies[best - 1]
        };
        let med = median(&mut rest);
        let mut own = copies.clone();
        let w = if best == 0 { z - median(&mut own) } else { 0.0 };
        out.w.push(w);
        out.kappa.push(best);
        out.t.push(top - med);
    }
    out
}

/// Multiple-knockoff filter at level `q`.
///
/// `τ` is the smallest observed `T > 0` with
/// `(1/m)(1 + #{κ ≥ 1, T ≥ τ}) / max(1, #{κ = 0, T ≥ τ}) ≤ q`; groups with
/// `κ = 0` and `T ≥ τ` are selected.
pub fn multiple_knockoff_filter(w: &[f64], kappa: &[usize], t: &[f64], q: f64, m: usize) -> SelectionResult {
    let mf = m as f64;
    let mut cands: Vec<f64> = t.iter().copied().filter(|&v| v > 0.0).collect();
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let mut tau = f64::INFINITY;
    for &c in &cands {
        let (mut neg, mut pos) = (0usize, 0usize);
        for (&k, &tv) in kappa.iter().zip(t) {
            if tv >= c {
                if k == 0 {
                    pos += 1;
                } else {
                    neg += 1;
                }
            }
        }
        if (1.0 + neg as f64) / mf / (pos.max(1) as f64) <= q {
            tau = c;
            break;
        }
    }
    let selected = (0..t.len()).filter(|&g| kappa[g] == 0 && t[g] >= tau).collect();
    SelectionResult { w: w.to_vec(), kappa: kappa.to_vec(), t: t.to_vec(), tau, selected, q }
}

/// Power and false discovery proportion of a selection of groups, where a
/// group is null when it holds no causal variable.
pub fn power_fdr(selected: &[usize], causal_groups: &[usize], _total_groups: usize) -> Metrics {
    let causal: BTreeSet<usize> = causal_groups.iter().copied().collect();
    let sel: BTreeSet<usize> = selected.iter().copied().collect();
    let hits = sel.intersection(&causal).count();
    let power = if causal.is_empty() { 0.0 } else { hits as f64 / causal.len() as f64 };
    let fdp = (sel.len() - hits) as f64 / sel.len().max(1) as f64;
    Metrics { power, fdp }
}

/// CSV with header `group,kappa,T,W,selected` and 1-based groups.
pub fn selection_csv(res: &SelectionResult) -> String {
    let sel: BTreeSet<usize> = res.selected.iter().copied().collect();
    let mut s = String::from("group,kappa,T,W,selected\n");
    for g in 0..res.w.len() {
        writeln!(s, "{},{},{},{},{}", g + 1, res.kappa[g], res.t[g], res.w[g], u8::from(sel.contains(&g))).unwrap();
    }
    s
}

pub fn metrics_text(m: &Metrics) -> String {
    format!("power={}, fdp={}\n", m.power, m.fdp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(z: f64, copies: &[f64]) -> GroupScores {
        GroupScores { z: vec![z], z_tilde: vec![copies.to_vec()] }
    }

    #[test]
    fn w_original_wins() {
        let w = knockoff_w(&scores(3.0, &[1.0, 0.0, 2.0, 0.0, 1.0]));
        assert_eq!((w.w[0], w.kappa[0]), (2.0, 0));
    }

    #[test]
    fn w_copy_wins() {
        let w = knockoff_w(&scores(1.0, &[3.0, 0.0, 0.0, 0.0, 0.0]));
        assert_eq!((w.w[0], w.kappa[0]), (0.0, 1));
        // rest = {1, 0, 0, 0, 0}, median 0
        assert_eq!(w.t[0], 3.0);
    }

    #[test]
    fn w_tie() {
        let w = knockoff_w(&scores(2.0, &[2.0, 2.0]));
        assert_eq!((w.w[0], w.kappa[0], w.t[0]), (0.0, 0, 0.0));
    }

    #[test]
    fn filter_single_copy_example() {
        let w = [3.0, -1.0, 2.0, -2.0, 1.0, 4.0];
        let kappa: Vec<usize> = w.iter().map(|&x| usize::from(x < 0.0)).collect();
        let t: Vec<f64> = w.iter().map(|x: &f64| x.abs()).collect();
        let res = multiple_knockoff_filter(&w, &kappa, &t, 0.5, 1);
        assert_eq!(res.tau, 3.0);
        assert_eq!(res.selected, vec![0, 5]);
    }

    #[test]
    fn filter_all_copies_win() {
        let res = multiple_knockoff_filter(&[0.0; 3], &[1, 2, 1], &[1.0, 2.0, 3.0], 0.9, 2);
        assert!(res.selected.is_empty());
    }

    #[test]
    fn metrics() {
        let m = power_fdr(&[1, 2, 3], &[1, 4], 10);
        assert_eq!(m.power, 0.5);
        assert!((m.fdp - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(power_fdr(&[], &[1], 3), Metrics { power: 0.0, fdp: 0.0 });
    }
}
