//! A model specification bundles a classifier with its fold-local
//! transforms; a trained model replays those transforms on new data.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::knn::{fit_knn, KnnModel, KnnParams};
use crate::preprocess::scale::{apply_scaler, fit_scaler, FittedTransform, ScalerKind};
use crate::preprocess::smote::{smote, SmoteParams};
use crate::rng;
use crate::svm::{smo_fit, SvmModel, SvmParams};
use crate::trees::{fit_forest, Forest, RfParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelKind {
    RandomForest(RfParams),
    Svm(SvmParams),
    Knn(KnnParams),
    /// Always predicts the given class.
    Constant(u8),
}

impl ModelKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ModelKind::RandomForest(_) => "rf",
            ModelKind::Svm(_) => "svm",
            ModelKind::Knn(_) => "knn",
            ModelKind::Constant(_) => "constant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub kind: ModelKind,
    pub scaling: Option<ScalerKind>,
    pub smote: Option<SmoteParams>,
}

impl ModelSpec {
    /// 200 trees, depth 15, split 10, leaf 5, unscaled.
    pub fn random_forest() -> Self {
        Self {
            name: "Random Forest".into(),
            kind: ModelKind::RandomForest(RfParams::default()),
            scaling: None,
            smote: None,
        }
    }

    /// RBF kernel, C = 10, gamma = 0.1, balanced weights, standardized inputs.
    pub fn svm() -> Self {
        Self {
            name: "SVM".into(),
            kind: ModelKind::Svm(SvmParams::default()),
            scaling: Some(ScalerKind::StandardScale),
            smote: None,
        }
    }

    /// k = 5 with inverse-distance votes on min-max scaled inputs, SMOTE-balanced.
    pub fn knn() -> Self {
        Self {
            name: "KNN".into(),
            kind: ModelKind::Knn(KnnParams::default()),
            scaling: Some(ScalerKind::MinMaxScale),
            smote: Some(SmoteParams::default()),
        }
    }

    pub fn constant(class: u8) -> Self {
        Self {
            name: format!("Constant {class}"),
            kind: ModelKind::Constant(class),
            scaling: None,
            smote: None,
        }
    }

    pub fn defaults() -> Vec<ModelSpec> {
        vec![Self::random_forest(), Self::svm(), Self::knn()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelPayload {
    Forest(Forest),
    Svm(SvmModel),
    Knn(KnnModel),
    Constant(u8),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub payload: ModelPayload,
    pub scaler: Option<FittedTransform>,
    pub feature_names: Vec<String>,
}

impl TrainedModel {
    /// Fits scaling and SMOTE (in that order) on `train`, then the classifier.
    /// `seed` replaces the seed inside the classifier parameters.
    pub fn fit(spec: &ModelSpec, train: &Dataset, seed: u64) -> Result<TrainedModel> {
        let scaler = spec.scaling.map(|k| fit_scaler(train, k));
        let mut data = match &scaler {
            Some(s) => apply_scaler(s, train)?,
            None => train.clone(),
        };
        if let Some(p) = &spec.smote {
            data = smote(&data, p, rng::derive_named(seed, "smote", 0))?;
        }
        let payload = match &spec.kind {
            ModelKind::RandomForest(p) => ModelPayload::Forest(fit_forest(&data, &RfParams { seed, ..*p })?),
            ModelKind::Svm(p) => ModelPayload::Svm(smo_fit(&data, &SvmParams { seed, ..*p })?),
            ModelKind::Knn(p) => ModelPayload::Knn(fit_knn(&data, p)?),
            ModelKind::Constant(c) => {
                if *c > 1 {
                    return Err(Error::Parameter(format!("constant class must be 0 or 1, got {c}")));
                }
                ModelPayload::Constant(*c)
            }
        };
        Ok(TrainedModel {
            spec: spec.clone(),
            payload,
            scaler,
            feature_names: train.feature_names().to_vec(),
        })
    }

    /// Labels and scores (class-1 probability, vote share or SVM decision value).
    pub fn predict(&self, dataset: &Dataset) -> Result<Vec<(u8, f64)>> {
        if dataset.feature_names() != self.feature_names.as_slice() {
            let differing: Vec<String> = self
                .feature_names
                .iter()
                .filter(|n| !dataset.feature_names().contains(n))
                .chain(dataset.feature_names().iter().filter(|n| !self.feature_names.contains(n)))
                .cloned()
                .collect();
            return Err(Error::Transform {
                detail: format!(
                    "model expects {} features, dataset has {}",
                    self.feature_names.len(),
                    dataset.n_features()
                ),
                differing,
            });
        }
        let data = match &self.scaler {
            Some(s) => apply_scaler(s, dataset)?,
            None => dataset.clone(),
        };
        match &self.payload {
            ModelPayload::Forest(f) => f.predict(data.features()),
            ModelPayload::Svm(m) => m.predict_dataset(&data),
            ModelPayload::Knn(m) => m.predict_dataset(&data),
            ModelPayload::Constant(c) => Ok(vec![(*c, *c as f64); data.n_rows()]),
        }
    }

    pub fn predict_labels(&self, dataset: &Dataset) -> Result<Vec<u8>> {
        Ok(self.predict(dataset)?.into_iter().map(|p| p.0).collect())
    }

    /// Solver convergence flag; always true for models without an iterative solver.
    pub fn converged(&self) -> bool {
        match &self.payload {
            ModelPayload::Svm(m) => m.converged,
            _ => true,
        }
    }
}
