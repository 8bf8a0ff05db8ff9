use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Dataset, PipelineError};
use crate::hsic::distinct_sorted;

/// Named partitions `S1`, `S2` and `R` of one dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SplitPlan {
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
    pub r: Vec<usize>,
}

impl SplitPlan {
    /// Checks range, pairwise disjointness and, with subject ids, that no
    /// subject spans two partitions.
    pub fn validate(&self, data: &Dataset) -> Result<(), PipelineError> {
        let mut owner = alloc::vec![usize::MAX; data.n()];
        for (part, idx) in [&self.s1, &self.s2, &self.r].into_iter().enumerate() {
            for &i in idx {
                if i >= data.n() {
                    return Err(PipelineError::IndexOutOfRange { index: i, rows: data.n() });
                }
                if owner[i] != usize::MAX {
                    return Err(PipelineError::OverlappingPartitions { index: i });
                }
                owner[i] = part;
            }
        }
        if let Some(ids) = data.subject_id() {
            let mut seen: alloc::collections::BTreeMap<&str, usize> = Default::default();
            for (i, &part) in owner.iter().enumerate() {
                if part == usize::MAX {
                    continue;
                }
                if let Some(&prev) = seen.get(ids[i].as_str()) {
                    if prev != part {
                        return Err(PipelineError::SharedSubject { subject: ids[i].clone() });
                    }
                } else {
                    seen.insert(ids[i].as_str(), part);
                }
            }
        }
        Ok(())
    }
}

/// Per-class random split; each class with at least two members keeps at
/// least one row on each side. Both index lists are ascending.
pub fn stratified_split(y: &[i64], train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for c in distinct_sorted(y) {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
        idx.shuffle(&mut rng);
        let n = idx.len();
        let mut k = libm::round(train_fraction * n as f64) as usize;
        if n >= 2 {
            k = k.clamp(1, n - 1);
        } else {
            k = k.min(n);
        }
        train.extend_from_slice(&idx[..k]);
        test.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// `size` indices drawn uniformly with replacement from `0..n`.
pub fn bootstrap_indices(n: usize, size: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size).map(|_| rng.random_range(0..n)).collect()
}

/// Subjects in ascending order with their row indices.
pub fn subject_groups(ids: &[String]) -> Vec<(String, Vec<usize>)> {
    let subjects: BTreeSet<&String> = ids.iter().collect();
    subjects.into_iter().map(|s| (s.clone(), (0..ids.len()).filter(|&i| &ids[i] == s).collect())).collect()
}
