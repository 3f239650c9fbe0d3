//! Variable groups and per-group key variables.

mod hier;
mod interp;
mod keys;

pub use hier::{cluster_groups_hier, Linkage};
pub use interp::cluster_groups_id;
pub use keys::{key_ratio, select_key_variables};

use crate::error::{Error, Result};
use std::fmt::Write as _;

/// Assignment of `p` variables to groups `0..g`.
///
/// Group ids are 0-based in memory and 1-based in files.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupPartition {
    assignments: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl GroupPartition {
    /// Build from dense 0-based group ids.
    pub fn new(assignments: Vec<usize>) -> Result<Self> {
        let g = assignments.iter().map(|&a| a + 1).max().unwrap_or(0);
        let mut members = vec![Vec::new(); g];
        for (i, &a) in assignments.iter().enumerate() {
            members[a].push(i);
        }
        if let Some(empty) = members.iter().position(|m| m.is_empty()) {
            return Err(Error::InvalidInput(format!("group id {} has no members", empty + 1)));
        }
        Ok(GroupPartition { assignments, members })
    }

    /// Build from arbitrary labels, numbering groups by first appearance.
    pub fn from_labels<T: PartialEq + Copy>(labels: &[T]) -> Self {
        let mut seen: Vec<T> = Vec::new();
        let ids = labels
            .iter()
            .map(|l| match seen.iter().position(|s| s == l) {
                Some(k) => k,
                None => {
                    seen.push(*l);
                    seen.len() - 1
                }
            })
            .collect();
        GroupPartition::new(ids).expect("labels by first appearance are dense")
    }

    pub fn singletons(p: usize) -> Self {
        GroupPartition::new((0..p).collect()).unwrap()
    }

    pub fn single_group(p: usize) -> Self {
        GroupPartition::new(vec![0; p]).unwrap()
    }

    /// Consecutive blocks of `size` (the last block may be shorter).
    pub fn contiguous_blocks(p: usize, size: usize) -> Self {
        assert!(size > 0);
        GroupPartition::new((0..p).map(|i| i / size).collect()).unwrap()
    }

    pub fn p(&self) -> usize {
        self.assignments.len()
    }

    pub fn num_groups(&self) -> usize {
        self.members.len()
    }

    pub fn group_of(&self, i: usize) -> usize {
        self.assignments[i]
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn members(&self, g: usize) -> &[usize] {
        &self.members[g]
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.members
    }

    /// Every group is a consecutive index range.
    pub fn is_contiguous(&self) -> bool {
        self.members.iter().all(|m| m.windows(2).all(|w| w[1] == w[0] + 1))
    }

    /// Number of within-group `(i, j)` pairs, `Σ_γ |A_γ|²`.
    pub fn block_entries(&self) -> usize {
        self.members.iter().map(|m| m.len() * m.len()).sum()
    }

    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        for a in &self.assignments {
            writeln!(s, "{}", a + 1).unwrap();
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut ids = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let id: usize = t
                .parse()
                .map_err(|_| Error::Format(format!("line {}: bad group id {t:?}", ln + 1)))?;
            if id == 0 {
                return Err(Error::Format(format!("line {}: group ids are 1-based", ln + 1)));
            }
            ids.push(id - 1);
        }
        if ids.is_empty() {
            return Err(Error::Format("empty groups file".into()));
        }
        GroupPartition::new(ids).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Per-group split into key (`A*`) and non-key (`A†`) variables.
#[derive(Clone, Debug, PartialEq)]
pub struct KeySelection {
    pub keys: Vec<Vec<usize>>,
    pub non_keys: Vec<Vec<usize>>,
    /// Threshold the selection was run at; `None` when read from a file.
    pub threshold_c: Option<f64>,
}

impl KeySelection {
    /// Every variable is a key.
    pub fn all(partition: &GroupPartition) -> Self {
        KeySelection {
            keys: partition.groups().to_vec(),
            non_keys: vec![Vec::new(); partition.num_groups()],
            threshold_c: Some(1.0),
        }
    }

    /// Split each group by a list of key variables (0-based).
    pub fn from_key_indices(partition: &GroupPartition, key_list: &[usize]) -> Result<Self> {
        let p = partition.p();
        let mut is_key = vec![false; p];
        for &k in key_list {
            if k >= p {
                return Err(Error::InvalidInput(format!("key index {} exceeds p = {p}", k + 1)));
            }
            is_key[k] = true;
        }
        let mut keys = Vec::new();
        let mut non_keys = Vec::new();
        for (g, m) in partition.groups().iter().enumerate() {
            let (k, n): (Vec<usize>, Vec<usize>) = m.iter().partition(|&&i| is_key[i]);
            if k.is_empty() {
                return Err(Error::InvalidInput(format!("group {} has no key variable", g + 1)));
            }
            keys.push(k);
            non_keys.push(n);
        }
        Ok(KeySelection { keys, non_keys, threshold_c: None })
    }

    /// All key variables in ascending order.
    pub fn all_keys(&self) -> Vec<usize> {
        let mut k: Vec<usize> = self.keys.iter().flatten().copied().collect();
        k.sort_unstable();
        k
    }

    pub fn num_keys(&self) -> usize {
        self.keys.iter().map(|k| k.len()).sum()
    }

    /// Partition of the key variables (indexed in `all_keys` order) by group.
    pub fn key_partition(&self, partition: &GroupPartition) -> GroupPartition {
        let labels: Vec<usize> = self.all_keys().iter().map(|&i| partition.group_of(i)).collect();
        GroupPartition::new(labels).expect("every group keeps at least one key")
    }

    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        for k in self.all_keys() {
            writeln!(s, "{}", k + 1).unwrap();
        }
        s
    }

    pub fn parse(text: &str, partition: &GroupPartition) -> Result<Self> {
        let mut list = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let k: usize = t
                .parse()
                .ok()
                .filter(|&k| k > 0)
                .ok_or_else(|| Error::Format(format!("line {}: bad key index {t:?}", ln + 1)))?;
            list.push(k - 1);
        }
        KeySelection::from_key_indices(partition, &list).map_err(|e| Error::Format(e.to_string()))
    }
}
