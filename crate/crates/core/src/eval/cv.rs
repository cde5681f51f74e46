use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::eval::folds::{stratified_folds, training_indices};
use crate::eval::metrics::{ConfusionMatrix, Metrics};
use crate::model::{ModelSpec, TrainedModel};
use crate::rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
    /// False when an iterative solver stopped at its pass limit.
    pub converged: bool,
    /// Wall-clock training plus scoring time; excluded from equality.
    #[serde(skip)]
    pub wall_ms: f64,
}

impl PartialEq for FoldResult {
    fn eq(&self, other: &Self) -> bool {
        self.fold == other.fold
            && self.n_train == other.n_train
            && self.n_test == other.n_test
            && self.confusion == other.confusion
            && self.metrics == other.metrics
            && self.converged == other.converged
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub model: String,
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    pub mean: Metrics,
    /// Sample standard deviation over folds (0 for a single fold).
    pub std: Metrics,
}

impl CvReport {
    fn from_folds(model: &str, seed: u64, folds: Vec<FoldResult>) -> Self {
        let k = folds.len();
        let mut mean = [0.0; 4];
        for f in &folds {
            for (m, v) in mean.iter_mut().zip(f.metrics.as_array()) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= k as f64);
        let mut std = [0.0; 4];
        if k > 1 {
            for f in &folds {
                for ((s, v), m) in std.iter_mut().zip(f.metrics.as_array()).zip(mean) {
                    *s += (v - m) * (v - m);
                }
            }
            std.iter_mut().for_each(|s| *s = (*s / (k - 1) as f64).sqrt());
        }
        Self {
            model: model.to_string(),
            k,
            seed,
            folds,
            mean: Metrics::from_array(mean),
            std: Metrics::from_array(std),
        }
    }

    pub fn all_converged(&self) -> bool {
        self.folds.iter().all(|f| f.converged)
    }
}

/// Model seed used for fold `fold`.
pub fn fold_seed(seed: u64, fold: usize) -> u64 {
    rng::derive_named(seed, "fold", fold as u64)
}

/// Fits `spec` (including its scaler and SMOTE) on the rows outside fold `fold`.
pub fn fit_fold(spec: &ModelSpec, dataset: &Dataset, folds: &[Vec<usize>], fold: usize, seed: u64) -> Result<TrainedModel> {
    let train = dataset.select_rows(&training_indices(folds, fold));
    TrainedModel::fit(spec, &train, fold_seed(seed, fold)).map_err(|e| Error::Fold {
        fold,
        source: Box::new(e),
    })
}

/// Cross-validates over precomputed folds; folds run in parallel and are
/// reported in fold order.
pub fn cross_validate_folds(spec: &ModelSpec, dataset: &Dataset, folds: &[Vec<usize>], seed: u64) -> Result<CvReport> {
    if folds.len() < 2 {
        return Err(Error::Parameter("cross-validation needs at least 2 folds".into()));
    }
    let results = (0..folds.len())
        .into_par_iter()
        .map(|f| {
            let start = Instant::now();
            let model = fit_fold(spec, dataset, folds, f, seed)?;
            let test = dataset.select_rows(&folds[f]);
            let pred = model.predict_labels(&test).map_err(|e| Error::Fold {
                fold: f,
                source: Box::new(e),
            })?;
            let confusion = ConfusionMatrix::from_predictions(&pred, test.labels())?;
            Ok(FoldResult {
                fold: f,
                n_train: dataset.n_rows() - folds[f].len(),
                n_test: folds[f].len(),
                confusion,
                metrics: confusion.metrics(),
                converged: model.converged(),
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CvReport::from_folds(&spec.name, seed, results))
}

/// Stratified K-fold cross-validation of one model specification.
pub fn cross_validate(spec: &ModelSpec, dataset: &Dataset, k: usize, seed: u64) -> Result<CvReport> {
    let folds = stratified_folds(dataset.labels(), k, seed)?;
    cross_validate_folds(spec, dataset, &folds, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    /// Ranked by mean F1, descending; ties by model name.
    pub rows: Vec<CvReport>,
    pub folds: Vec<Vec<usize>>,
}

impl ComparisonTable {
    /// `"<model> <F1> <accuracy> <recall>"` with four decimals.
    pub fn format_row(r: &CvReport) -> String {
        format!("{} {:.4} {:.4} {:.4}", r.model, r.mean.f1, r.mean.accuracy, r.mean.recall)
    }

    pub fn render(&self) -> String {
        let mut s = String::from("Model Mean_F1 Mean_Accuracy Mean_Recall\n");
        for r in &self.rows {
            s.push_str(&Self::format_row(r));
            s.push('\n');
        }
        s
    }

    pub fn get(&self, model: &str) -> Option<&CvReport> {
        self.rows.iter().find(|r| r.model == model)
    }
}

/// Cross-validates every spec on the same folds and ranks the results.
pub fn compare_models(specs: &[ModelSpec], dataset: &Dataset, k: usize, seed: u64) -> Result<ComparisonTable> {
    if specs.is_empty() {
        return Err(Error::Parameter("compare needs at least one model".into()));
    }
    let folds = stratified_folds(dataset.labels(), k, seed)?;
    let mut rows = specs
        .iter()
        .map(|s| cross_validate_folds(s, dataset, &folds, seed))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| b.mean.f1.total_cmp(&a.mean.f1).then_with(|| a.model.cmp(&b.model)));
    Ok(ComparisonTable { rows, folds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ColumnKind;
    use crate::preprocess::scale::ScalerKind;
    use ndarray::Array2;
    use rand::Rng;

    fn data(n: usize, seed: u64) -> Dataset {
        let mut s = rng::stream(seed);
        let x = Array2::from_shape_fn((n, 2), |_| s.random::<f64>());
        // 30% positives
        let y = (0..n).map(|i| u8::from(i % 10 < 3)).collect();
        Dataset::new(x, vec!["a".into(), "b".into()], vec![ColumnKind::Numeric; 2], y, vec!["g".into(); n]).unwrap()
    }

    #[test]
    fn constant_model_scores() {
        let r = cross_validate(&ModelSpec::constant(0), &data(100, 1), 5, 3).unwrap();
        assert!((r.mean.accuracy - 0.7).abs() < 1e-12);
        assert_eq!((r.mean.recall, r.mean.f1), (0.0, 0.0));
        assert_eq!(r.folds.len(), 5);
    }

    #[test]
    fn deterministic_and_consistent_means() {
        let d = data(120, 2);
        let spec = ModelSpec::knn();
        let a = cross_validate(&spec, &d, 4, 9).unwrap();
        let b = cross_validate(&spec, &d, 4, 9).unwrap();
        assert_eq!(a, b);
        let f1: f64 = a.folds.iter().map(|f| f.metrics.f1).sum::<f64>() / 4.0;
        assert!((f1 - a.mean.f1).abs() < 1e-12);
    }

    #[test]
    fn validation_rows_do_not_touch_fold_scaler() {
        let d = data(60, 3);
        let folds = stratified_folds(d.labels(), 3, 1).unwrap();
        let spec = ModelSpec {
            scaling: Some(ScalerKind::StandardScale),
            ..ModelSpec::constant(0)
        };
        let before = fit_fold(&spec, &d, &folds, 0, 1).unwrap().scaler.unwrap();
        let v = folds[0][0];
        let mut col = d.column(0).to_vec();
        col[v] = 1e6;
        let perturbed = d.with_column(0, &col);
        let after = fit_fold(&spec, &perturbed, &folds, 0, 1).unwrap().scaler.unwrap();
        assert_eq!(before.location, after.location);
        assert_eq!(before.spread, after.spread);
    }

    #[test]
    fn comparison_ranks_and_formats() {
        let d = data(100, 4);
        let t = compare_models(&[ModelSpec::constant(0), ModelSpec::constant(1)], &d, 5, 1).unwrap();
        assert_eq!(t.rows[0].model, "Constant 1");
        assert_eq!(ComparisonTable::format_row(&t.rows[1]), "Constant 0 0.0000 0.7000 0.0000");
        let single = compare_models(&[ModelSpec::constant(1)], &d, 5, 1).unwrap();
        assert_eq!(single.rows.len(), 1);
        assert_eq!(single.folds, t.folds);
    }

    #[test]
    fn fold_errors_carry_index() {
        let d = data(50, 5);
        let spec = ModelSpec::constant(7);
        match cross_validate(&spec, &d, 5, 0) {
            Err(Error::Fold { source, .. }) => assert!(matches!(*source, Error::Parameter(_))),
            other => panic!("{other:?}"),
        }
    }
}
