//! Synthetic minority oversampling.

use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoteParams {
    pub k: usize,
    /// Oversample until minority / majority reaches this ratio.
    pub target_ratio: f64,
}

impl Default for SmoteParams {
    fn default() -> Self {
        Self { k: 5, target_ratio: 1.0 }
    }
}

fn sq_dist(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices (into `points`) of the `k` nearest other points of each point,
/// ties broken by lower index.
pub(crate) fn minority_neighbors(x: &Array2<f64>, points: &[usize], k: usize) -> Vec<Vec<usize>> {
    points
        .par_iter()
        .enumerate()
        .map(|(a, &ia)| {
            let mut d: Vec<(f64, usize)> = points
                .iter()
                .enumerate()
                .filter(|&(b, _)| b != a)
                .map(|(b, &ib)| (sq_dist(x.row(ia), x.row(ib)), b))
                .collect();
            d.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
            d.into_iter().take(k).map(|(_, b)| b).collect()
        })
        .collect()
}

/// Appends synthetic minority rows `x + u * (x_nn - x)` until the class
/// ratio reaches `params.target_ratio`. Original rows come first and are
/// unchanged; appended rows are flagged synthetic in the metadata.
pub fn smote(dataset: &Dataset, params: &SmoteParams, seed: u64) -> Result<Dataset> {
    if !(params.target_ratio > 0.0 && params.target_ratio <= 1.0) {
        return Err(Error::Parameter(format!(
            "SMOTE target ratio must lie in (0, 1], got {}",
            params.target_ratio
        )));
    }
    let [n0, n1] = dataset.class_counts();
    let minority_class: u8 = if n1 < n0 { 1 } else { 0 };
    let (minority, majority) = if n1 < n0 { (n1, n0) } else { (n0, n1) };
    if minority < 2 {
        return Err(Error::Resampling(format!(
            "minority class {minority_class} has {minority} samples, need at least 2"
        )));
    }
    if params.k == 0 || params.k > minority - 1 {
        return Err(Error::Parameter(format!(
            "SMOTE k must lie in 1..={} for {} minority samples, got {}",
            minority - 1,
            minority,
            params.k
        )));
    }
    let wanted = (params.target_ratio * majority as f64 - 1e-9).ceil() as usize;
    if wanted <= minority {
        return Ok(dataset.clone());
    }
    let need = wanted - minority;

    let x = dataset.features();
    let points: Vec<usize> = (0..dataset.n_rows())
        .filter(|&i| dataset.labels()[i] == minority_class)
        .collect();
    let neighbors = minority_neighbors(x, &points, params.k);

    let mut stream = rng::stream(seed);
    let p = dataset.n_features();
    let mut rows = Array2::zeros((need, p));
    let mut keys = Vec::with_capacity(need);
    for s in 0..need {
        let a = stream.random_range(0..points.len());
        let b = neighbors[a][stream.random_range(0..params.k)];
        let u: f64 = stream.random();
        let (xa, xb) = (x.row(points[a]), x.row(points[b]));
        for j in 0..p {
            rows[[s, j]] = xa[j] + u * (xb[j] - xa[j]);
        }
        keys.push(dataset.group_keys()[points[a]].clone());
    }
    Ok(dataset.append_synthetic(rows, vec![minority_class; need], keys))
}
