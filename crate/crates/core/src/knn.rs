//! Exact k-nearest-neighbour classification under Euclidean distance.

use std::cmp::Ordering;

use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::svm::check_scaler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KnnWeighting {
    /// Vote weight 1/d.
    Distance,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
    pub weighting: KnnWeighting,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self {
            k: 5,
            weighting: KnnWeighting::Distance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub rows: Array2<f64>,
    pub labels: Vec<u8>,
    pub params: KnnParams,
    pub feature_names: Vec<String>,
    pub scaler_fingerprint: Option<String>,
}

pub fn fit_knn(dataset: &Dataset, params: &KnnParams) -> Result<KnnModel> {
    let n = dataset.n_rows();
    if params.k == 0 || params.k > n {
        return Err(Error::Parameter(format!("k must lie in 1..={n}, got {}", params.k)));
    }
    Ok(KnnModel {
        rows: dataset.features().clone(),
        labels: dataset.labels().to_vec(),
        params: *params,
        feature_names: dataset.feature_names().to_vec(),
        scaler_fingerprint: dataset.meta().scaler_fingerprint.clone(),
    })
}

fn by_distance_then_index(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))
}

impl KnnModel {
    fn check_width(&self, width: usize) -> Result<()> {
        let p = self.rows.ncols();
        if width != p {
            return Err(Error::Width {
                expected: p,
                actual: width,
            });
        }
        Ok(())
    }

    /// The `k` closest stored rows as `(row index, distance)`, ascending,
    /// equal distances ordered by row index.
    pub fn kneighbors(&self, query: ArrayView1<f64>, k: usize) -> Result<Vec<(usize, f64)>> {
        self.check_width(query.len())?;
        let n = self.rows.nrows();
        if k == 0 || k > n {
            return Err(Error::Parameter(format!("k must lie in 1..={n}, got {k}")));
        }
        let mut d: Vec<(usize, f64)> = self
            .rows
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, r)| (i, r.iter().zip(query.iter()).map(|(a, b)| (a - b) * (a - b)).sum()))
            .collect();
        if k < n {
            d.select_nth_unstable_by(k - 1, by_distance_then_index);
            d.truncate(k);
        }
        d.sort_unstable_by(by_distance_then_index);
        Ok(d.into_iter().map(|(i, d2)| (i, d2.sqrt())).collect())
    }

    /// Label and normalized class weights `[share0, share1]`.
    ///
    /// With distance weighting, neighbours at distance zero (if any) are
    /// the only voters, with equal weight. Ties go to class 0.
    pub fn predict_one(&self, query: ArrayView1<f64>) -> Result<(u8, [f64; 2])> {
        let nb = self.kneighbors(query, self.params.k)?;
        let mut w = [0.0; 2];
        let exact = nb.iter().any(|&(_, d)| d == 0.0);
        for &(i, d) in &nb {
            let v = match self.params.weighting {
                KnnWeighting::Uniform => 1.0,
                KnnWeighting::Distance if exact => {
                    if d == 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                }
                KnnWeighting::Distance => 1.0 / d,
            };
            w[self.labels[i] as usize] += v;
        }
        let total = w[0] + w[1];
        Ok((u8::from(w[1] > w[0]), [w[0] / total, w[1] / total]))
    }

    /// Labels with the class-1 weight share.
    pub fn predict(&self, x: &Array2<f64>) -> Result<Vec<(u8, f64)>> {
        self.check_width(x.ncols())?;
        let rows: Vec<_> = x.rows().into_iter().collect();
        rows.par_iter()
            .map(|r| self.predict_one(r.view()).map(|(l, s)| (l, s[1])))
            .collect()
    }

    /// Like [`KnnModel::predict`], refusing data scaled differently from training data.
    pub fn predict_dataset(&self, dataset: &Dataset) -> Result<Vec<(u8, f64)>> {
        check_scaler(&self.scaler_fingerprint, dataset)?;
        self.predict(dataset.features())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ColumnKind;
    use crate::rng;
    use ndarray::array;
    use rand::Rng;

    fn ds(x: Array2<f64>, y: Vec<u8>) -> Dataset {
        let (n, p) = x.dim();
        Dataset::new(x, (0..p).map(|j| format!("f{j}")).collect(), vec![ColumnKind::Numeric; p], y, vec!["g".into(); n]).unwrap()
    }

    #[test]
    fn stores_all_rows_and_checks_k() {
        let d = ds(array![[0.0], [1.0], [2.0]], vec![0, 1, 0]);
        assert_eq!(fit_knn(&d, &KnnParams { k: 3, ..Default::default() }).unwrap().rows.nrows(), 3);
        assert!(matches!(fit_knn(&d, &KnnParams { k: 4, ..Default::default() }), Err(Error::Parameter(_))));
    }

    #[test]
    fn neighbour_examples() {
        let d = ds(array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![0, 1, 1]);
        let m = fit_knn(&d, &KnnParams { k: 1, ..Default::default() }).unwrap();
        let nb = m.kneighbors(array![0.1, 0.0].view(), 1).unwrap();
        assert_eq!(nb[0].0, 0);
        assert!((nb[0].1 - 0.1).abs() < 1e-15);
        assert_eq!(m.kneighbors(array![1.0, 0.0].view(), 1).unwrap(), vec![(1, 0.0)]);
        // (1,0) and (0,1) are equidistant from the origin
        let nb = m.kneighbors(array![0.0, 0.0].view(), 3).unwrap();
        assert_eq!(nb.iter().map(|p| p.0).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(m.kneighbors(array![0.0].view(), 1).is_err());
    }

    #[test]
    fn inverse_distance_vote() {
        let d = ds(array![[0.1], [0.5], [-0.5], [9.0]], vec![1, 0, 0, 1]);
        let m = fit_knn(&d, &KnnParams { k: 3, ..Default::default() }).unwrap();
        let (label, shares) = m.predict_one(array![0.0].view()).unwrap();
        assert_eq!(label, 1);
        assert!((shares[1] - 10.0 / 14.0).abs() < 1e-12);
    }

    #[test]
    fn exact_match_dominates() {
        let d = ds(array![[0.0], [0.01], [0.02]], vec![1, 0, 0]);
        let m = fit_knn(&d, &KnnParams { k: 3, ..Default::default() }).unwrap();
        assert_eq!(m.predict_one(array![0.0].view()).unwrap(), (1, [0.0, 1.0]));
    }

    #[test]
    fn uniform_tie_goes_to_zero() {
        let d = ds(array![[-1.0], [1.0]], vec![1, 0]);
        let m = fit_knn(&d, &KnnParams { k: 2, weighting: KnnWeighting::Uniform }).unwrap();
        assert_eq!(m.predict_one(array![0.0].view()).unwrap().0, 0);
    }

    #[test]
    fn one_nn_recovers_training_labels() {
        let mut s = rng::stream(3);
        let x = Array2::from_shape_fn((60, 3), |_| s.random::<f64>());
        let y: Vec<u8> = (0..60).map(|_| s.random_range(0..2)).collect();
        let m = fit_knn(&ds(x.clone(), y.clone()), &KnnParams { k: 1, ..Default::default() }).unwrap();
        let pred: Vec<u8> = m.predict(&x).unwrap().into_iter().map(|p| p.0).collect();
        assert_eq!(pred, y);
    }

    #[test]
    fn permutation_invariant_on_generic_data() {
        let mut s = rng::stream(4);
        let x = Array2::from_shape_fn((80, 2), |_| s.random::<f64>());
        let y: Vec<u8> = (0..80).map(|i| u8::from(x[[i, 0]] > 0.5)).collect();
        let q = Array2::from_shape_fn((40, 2), |_| s.random::<f64>());
        let m = fit_knn(&ds(x.clone(), y.clone()), &KnnParams::default()).unwrap();
        let perm: Vec<usize> = (0..80).rev().collect();
        let xp = x.select(ndarray::Axis(0), &perm);
        let yp = perm.iter().map(|&i| y[i]).collect();
        let mp = fit_knn(&ds(xp, yp), &KnnParams::default()).unwrap();
        let a: Vec<u8> = m.predict(&q).unwrap().into_iter().map(|p| p.0).collect();
        let b: Vec<u8> = mp.predict(&q).unwrap().into_iter().map(|p| p.0).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn refuses_other_scaler() {
        let d = ds(array![[0.0], [1.0]], vec![0, 1]);
        let mut m = fit_knn(&d, &KnnParams { k: 1, ..Default::default() }).unwrap();
        m.scaler_fingerprint = Some("x".into());
        assert!(matches!(m.predict_dataset(&d), Err(Error::ScalerMismatch { .. })));
    }
}
