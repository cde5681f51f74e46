use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fingerprint::Fingerprinter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalerKind {
    StandardScale,
    MinMaxScale,
}

impl ScalerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScalerKind::StandardScale => "standard_scale",
            ScalerKind::MinMaxScale => "min_max_scale",
        }
    }
}

/// Per-feature scaling statistics.
///
/// `location`/`spread` hold mean and population standard deviation for
/// standard scaling, column minimum and maximum for min-max scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedTransform {
    pub kind: ScalerKind,
    pub location: Vec<f64>,
    pub spread: Vec<f64>,
    pub feature_names: Vec<String>,
    pub fitted_on: String,
}

impl FittedTransform {
    /// Identity of the fitted statistics; models trained on scaled data
    /// record it and compare it against query datasets.
    pub fn fingerprint(&self) -> String {
        let mut fp = Fingerprinter::new();
        fp.str(self.kind.as_str());
        for n in &self.feature_names {
            fp.str(n);
        }
        for v in self.location.iter().chain(&self.spread) {
            fp.f64(*v);
        }
        fp.finish()
    }

    fn scale_value(&self, j: usize, x: f64) -> f64 {
        match self.kind {
            ScalerKind::StandardScale => {
                let sd = self.spread[j];
                if sd == 0.0 {
                    0.0
                } else {
                    (x - self.location[j]) / sd
                }
            }
            ScalerKind::MinMaxScale => {
                let range = self.spread[j] - self.location[j];
                if range == 0.0 {
                    0.0
                } else {
                    (x - self.location[j]) / range
                }
            }
        }
    }
}

pub fn fit_scaler(dataset: &Dataset, kind: ScalerKind) -> FittedTransform {
    let n = dataset.n_rows() as f64;
    let p = dataset.n_features();
    let mut location = Vec::with_capacity(p);
    let mut spread = Vec::with_capacity(p);
    for j in 0..p {
        let col = dataset.column(j);
        match kind {
            ScalerKind::StandardScale => {
                let mean = col.sum() / n;
                let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
                location.push(mean);
                spread.push(var.sqrt());
            }
            ScalerKind::MinMaxScale => {
                location.push(col.iter().copied().fold(f64::INFINITY, f64::min));
                spread.push(col.iter().copied().fold(f64::NEG_INFINITY, f64::max));
            }
        }
    }
    FittedTransform {
        kind,
        location,
        spread,
        feature_names: dataset.feature_names().to_vec(),
        fitted_on: dataset.fingerprint(),
    }
}

/// Scales every feature; constant features (zero spread) map to 0.
pub fn apply_scaler(t: &FittedTransform, dataset: &Dataset) -> Result<Dataset> {
    if t.feature_names != dataset.feature_names() {
        let mut differing: Vec<String> = t
            .feature_names
            .iter()
            .filter(|n| !dataset.feature_names().contains(n))
            .chain(dataset.feature_names().iter().filter(|n| !t.feature_names.contains(n)))
            .cloned()
            .collect();
        if differing.is_empty() {
            differing.push("(column order differs)".into());
        }
        return Err(Error::Transform {
            detail: format!(
                "scaler fitted on {} features, dataset has {}",
                t.feature_names.len(),
                dataset.n_features()
            ),
            differing,
        });
    }
    let mut x = dataset.features().clone();
    for (j, mut col) in x.columns_mut().into_iter().enumerate() {
        col.mapv_inplace(|v| t.scale_value(j, v));
    }
    Ok(dataset.with_scaled_features(x, t.fingerprint()))
}
