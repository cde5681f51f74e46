//! Binary soft-margin SVM with an RBF kernel, trained by SMO.

mod kernel;
mod smo;
mod weights;

use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng;

pub use kernel::rbf_kernel;
pub use weights::{balanced_weights, class_weights, ClassWeighting};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    /// KKT tolerance.
    pub tolerance: f64,
    /// Upper bound on solver sweeps over the data.
    pub max_passes: usize,
    pub class_weighting: ClassWeighting,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 10.0,
            gamma: 0.1,
            tolerance: 1e-3,
            max_passes: 10_000,
            class_weighting: ClassWeighting::Balanced,
            seed: 42,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("C", self.c), ("gamma", self.gamma), ("tolerance", self.tolerance)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("SVM {name} must be positive, got {v}")));
            }
        }
        if self.max_passes == 0 {
            return Err(Error::Parameter("SVM max_passes must be >= 1".into()));
        }
        Ok(())
    }
}

/// Trained model; only rows with a positive multiplier are kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Array2<f64>,
    /// +1 for label 1, -1 for label 0.
    pub sv_labels: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Effective box bound `C * w_y` of each support vector.
    pub sv_bounds: Vec<f64>,
    /// Row index of each support vector in the training dataset.
    pub support_indices: Vec<usize>,
    pub b: f64,
    pub gamma: f64,
    pub params: SvmParams,
    pub class_weights: [f64; 2],
    pub feature_names: Vec<String>,
    pub scaler_fingerprint: Option<String>,
    pub converged: bool,
    pub passes: usize,
}

fn signed(labels: &[u8]) -> Vec<f64> {
    labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect()
}

fn fit_inner(dataset: &Dataset, params: &SvmParams, trace: bool) -> Result<(SvmModel, Option<Vec<f64>>)> {
    params.validate()?;
    dataset.require_both_classes("SVM")?;
    let weights = class_weights(dataset.labels(), params.class_weighting)?;
    let y = signed(dataset.labels());
    let c: Vec<f64> = dataset
        .labels()
        .iter()
        .map(|&l| params.c * weights[l as usize])
        .collect();
    let x = dataset.features();
    let mut solver = smo::Solver::new(x, &y, &c, params.gamma, params.tolerance, rng::stream(params.seed));
    if trace {
        solver.trace = Some(Vec::new());
    }
    let (out, trace) = solver.run(params.max_passes);
    let support_indices: Vec<usize> = (0..y.len()).filter(|&i| out.alpha[i] > 0.0).collect();
    let model = SvmModel {
        support_vectors: x.select(ndarray::Axis(0), &support_indices),
        sv_labels: support_indices.iter().map(|&i| y[i]).collect(),
        alpha: support_indices.iter().map(|&i| out.alpha[i]).collect(),
        sv_bounds: support_indices.iter().map(|&i| c[i]).collect(),
        support_indices,
        b: out.b,
        gamma: params.gamma,
        params: *params,
        class_weights: weights,
        feature_names: dataset.feature_names().to_vec(),
        scaler_fingerprint: dataset.meta().scaler_fingerprint.clone(),
        converged: out.converged,
        passes: out.passes,
    };
    Ok((model, trace))
}

/// Trains with SMO. A run that exhausts `max_passes` still returns the
/// partial model, with `converged == false`.
pub fn smo_fit(dataset: &Dataset, params: &SvmParams) -> Result<SvmModel> {
    fit_inner(dataset, params, false).map(|(m, _)| m)
}

/// Same as [`smo_fit`], also returning the dual objective after every
/// accepted step. Quadratic cost per step; meant for small problems.
pub fn smo_fit_traced(dataset: &Dataset, params: &SvmParams) -> Result<(SvmModel, Vec<f64>)> {
    fit_inner(dataset, params, true).map(|(m, t)| (m, t.unwrap_or_default()))
}

/// Worst KKT residual on a training set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    pub max_violation: f64,
    pub violators: usize,
    /// `|sum a_i y_i|`
    pub equality_residual: f64,
    /// Largest excursion of a multiplier outside `[0, C_i]`.
    pub box_residual: f64,
}

impl KktReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_violation <= tol && self.equality_residual <= 1e-6 && self.box_residual == 0.0
    }
}

impl SvmModel {
    fn decision_row(&self, row: ArrayView1<f64>) -> f64 {
        let mut f = self.b;
        for (i, sv) in self.support_vectors.rows().into_iter().enumerate() {
            f += self.alpha[i] * self.sv_labels[i] * kernel::rbf_unchecked(sv, row, self.gamma);
        }
        f
    }

    /// Decision values `f(x)`.
    pub fn decision(&self, x: &Array2<f64>) -> Result<Vec<f64>> {
        let p = self.feature_names.len();
        if x.ncols() != p {
            return Err(Error::Width {
                expected: p,
                actual: x.ncols(),
            });
        }
        let rows: Vec<_> = x.rows().into_iter().collect();
        Ok(rows.par_iter().map(|r| self.decision_row(r.view())).collect())
    }

    /// Labels (`f >= 0` maps to 1) paired with decision values.
    pub fn predict(&self, x: &Array2<f64>) -> Result<Vec<(u8, f64)>> {
        Ok(self
            .decision(x)?
            .into_iter()
            .map(|f| (u8::from(f >= 0.0), f))
            .collect())
    }

    /// Like [`SvmModel::predict`], refusing data scaled differently from training data.
    pub fn predict_dataset(&self, dataset: &Dataset) -> Result<Vec<(u8, f64)>> {
        check_scaler(&self.scaler_fingerprint, dataset)?;
        self.predict(dataset.features())
    }

    /// KKT conditions evaluated on `train`, which must be the training set.
    pub fn kkt_report(&self, train: &Dataset) -> Result<KktReport> {
        let f = self.decision(train.features())?;
        let n = train.n_rows();
        let mut alpha = vec![0.0; n];
        for (k, &i) in self.support_indices.iter().enumerate() {
            alpha[i] = self.alpha[k];
        }
        let y = signed(train.labels());
        let mut report = KktReport {
            max_violation: 0.0,
            violators: 0,
            equality_residual: 0.0,
            box_residual: 0.0,
        };
        let mut eq = 0.0;
        for i in 0..n {
            let c = self.params.c * self.class_weights[train.labels()[i] as usize];
            let r = y[i] * f[i] - 1.0;
            let v = if alpha[i] == 0.0 {
                (-r).max(0.0)
            } else if alpha[i] < c {
                r.abs()
            } else {
                r.max(0.0)
            };
            if v > self.params.tolerance {
                report.violators += 1;
            }
            report.max_violation = report.max_violation.max(v);
            report.box_residual = report.box_residual.max((-alpha[i]).max(alpha[i] - c).max(0.0));
            eq += alpha[i] * y[i];
        }
        report.equality_residual = eq.abs();
        Ok(report)
    }

    /// `sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij` over the support vectors.
    pub fn dual_objective(&self) -> f64 {
        let m = self.alpha.len();
        let mut quad = 0.0;
        for i in 0..m {
            for j in 0..m {
                quad += self.alpha[i]
                    * self.alpha[j]
                    * self.sv_labels[i]
                    * self.sv_labels[j]
                    * kernel::rbf_unchecked(self.support_vectors.row(i), self.support_vectors.row(j), self.gamma);
            }
        }
        self.alpha.iter().sum::<f64>() - 0.5 * quad
    }
}

pub(crate) fn check_scaler(expected: &Option<String>, dataset: &Dataset) -> Result<()> {
    if let Some(fp) = expected {
        let actual = dataset.meta().scaler_fingerprint.clone().unwrap_or_else(|| "none".into());
        if *fp != actual {
            return Err(Error::ScalerMismatch {
                expected: fp.clone(),
                actual,
            });
        }
    }
    Ok(())
}
