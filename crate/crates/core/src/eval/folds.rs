use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;

/// Stratified K-fold assignment.
///
/// Indices of each class are shuffled with a stream seeded by `seed` and
/// dealt to folds round-robin; the deal continues across classes (class 0
/// first) so fold sizes also differ by at most one. Each fold is sorted.
///
/// A class may be absent from at most one validation fold: a present
/// class with fewer than `k - 1` rows is a stratification error.
pub fn stratified_folds(labels: &[u8], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k == 0 {
        return Err(Error::Parameter("number of folds must be >= 1".into()));
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset("no labels to stratify".into()));
    }
    let mut stream = rng::stream(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.is_empty() {
            continue;
        }
        if idx.len() + 1 < k {
            return Err(Error::Stratification {
                class,
                count: idx.len(),
                k,
            });
        }
        idx.shuffle(&mut stream);
        for i in idx {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Indices outside fold `f`.
pub fn training_indices(folds: &[Vec<usize>], f: usize) -> Vec<usize> {
    let mut v: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|&(g, _)| g != f)
        .flat_map(|(_, idx)| idx.iter().copied())
        .collect();
    v.sort_unstable();
    v
}
