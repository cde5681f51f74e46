use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::eval::metrics::f1_score;
use crate::model::TrainedModel;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationImportance {
    pub feature_names: Vec<String>,
    pub baseline_f1: f64,
    /// Baseline F1 minus mean F1 with the column shuffled; may be negative.
    pub importance: Vec<f64>,
    /// Sample standard deviation of the F1 drop over repeats.
    pub std: Vec<f64>,
}

impl PermutationImportance {
    /// Feature indices ordered by importance, largest first (ties by index).
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.importance.len()).collect();
        idx.sort_by(|&a, &b| self.importance[b].total_cmp(&self.importance[a]).then(a.cmp(&b)));
        idx
    }
}

/// F1 drop when column `j` is shuffled, averaged over `repeats` shuffles.
/// Shuffle `r` of column `j` uses its own stream derived from `(seed, j, r)`.
pub fn permutation_importance(
    model: &TrainedModel,
    dataset: &Dataset,
    repeats: usize,
    seed: u64,
) -> Result<PermutationImportance> {
    if repeats == 0 {
        return Err(Error::Parameter("permutation importance needs repeats >= 1".into()));
    }
    dataset.require_both_classes("permutation importance")?;
    let truth = dataset.labels();
    let baseline = f1_score(&model.predict_labels(dataset)?, truth)?;
    let p = dataset.n_features();
    let jobs: Vec<(usize, usize)> = (0..p).flat_map(|j| (0..repeats).map(move |r| (j, r))).collect();
    let drops = jobs
        .par_iter()
        .map(|&(j, r)| {
            let mut col = dataset.column(j).to_vec();
            col.shuffle(&mut rng::substream(rng::derive_named(seed, "permute", j as u64), r as u64));
            let shuffled = dataset.with_column(j, &col);
            Ok(baseline - f1_score(&model.predict_labels(&shuffled)?, truth)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut importance = Vec::with_capacity(p);
    let mut std = Vec::with_capacity(p);
    for chunk in drops.chunks(repeats) {
        let m = chunk.iter().sum::<f64>() / repeats as f64;
        importance.push(m);
        std.push(if repeats > 1 {
            (chunk.iter().map(|d| (d - m) * (d - m)).sum::<f64>() / (repeats - 1) as f64).sqrt()
        } else {
            0.0
        });
    }
    Ok(PermutationImportance {
        feature_names: dataset.feature_names().to_vec(),
        baseline_f1: baseline,
        importance,
        std,
    })
}
