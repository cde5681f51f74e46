//! Shared steps behind the subcommands: loading records, preprocessing,
//! model specifications and the importance and grid-search runs.

use auditml_core::eval::{
    cross_validate_folds, fold_seed, permutation_importance, stratified_folds, training_indices, CvReport,
    PermutationImportance,
};
use auditml_core::label::derive_labels;
use auditml_core::model::{ModelKind, ModelPayload};
use auditml_core::preprocess::pipeline::Prepared;
use auditml_core::preprocess::Preprocessor;
use auditml_core::record::parse_records;
use auditml_core::svm::SvmParams;
use auditml_core::synthgen::generate;
use auditml_core::trees::gini_importance;
use auditml_core::{rng, AuditRecord, Dataset, ModelSpec, TrainedModel};
use serde::Serialize;

use crate::config::{DataSource, PipelineConfig};
use crate::report::FileRef;
use crate::{CliError, ModelArg};

/// Records from the configured source, with the input file (if any) for
/// the manifest.
pub fn load_records(cfg: &PipelineConfig) -> Result<(Vec<AuditRecord>, Vec<FileRef>), CliError> {
    match &cfg.data {
        DataSource::Csv(path) => {
            let bytes =
                std::fs::read(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            let text = String::from_utf8(bytes)
                .map_err(|_| CliError::Io(format!("{} is not valid UTF-8", path.display())))?;
            let records = parse_records(&text)?;
            Ok((records, vec![FileRef::of(&path.display().to_string(), text.as_bytes())]))
        }
        DataSource::Generate(g) => Ok((generate(g, cfg.seed)?, Vec::new())),
    }
}

/// Labels the records, fits the record-level preprocessing on all of them
/// and builds the feature dataset.
pub fn prepare(cfg: &PipelineConfig, records: &[AuditRecord]) -> Result<(Preprocessor, Prepared), CliError> {
    let labels = derive_labels(records, &cfg.label)?;
    let pre = Preprocessor::fit(records, &cfg.prep)?;
    let prepared = pre.transform(records, &labels)?;
    Ok((pre, prepared))
}

pub fn model_spec(cfg: &PipelineConfig, which: ModelArg) -> ModelSpec {
    match which {
        ModelArg::Rf => ModelSpec {
            kind: ModelKind::RandomForest(cfg.rf),
            ..ModelSpec::random_forest()
        },
        ModelArg::Svm => ModelSpec {
            kind: ModelKind::Svm(cfg.svm),
            ..ModelSpec::svm()
        },
        ModelArg::Knn => ModelSpec {
            kind: ModelKind::Knn(cfg.knn),
            smote: cfg.smote,
            ..ModelSpec::knn()
        },
    }
}

pub fn all_specs(cfg: &PipelineConfig) -> Vec<ModelSpec> {
    [ModelArg::Rf, ModelArg::Svm, ModelArg::Knn].map(|m| model_spec(cfg, m)).to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceReport {
    pub model: String,
    pub n_train: usize,
    pub n_test: usize,
    /// Mean decrease in impurity; forests only.
    pub gini: Option<Vec<f64>>,
    pub permutation: PermutationImportance,
}

/// Fits the model on all folds but the first and measures permutation
/// importance on the held-out first fold.
pub fn importance(cfg: &PipelineConfig, data: &Dataset, which: ModelArg) -> Result<ImportanceReport, CliError> {
    let spec = model_spec(cfg, which);
    let folds = stratified_folds(data.labels(), cfg.k_folds, cfg.seed)?;
    let train = data.select_rows(&training_indices(&folds, 0));
    let test = data.select_rows(&folds[0]);
    let model = TrainedModel::fit(&spec, &train, fold_seed(cfg.seed, 0))?;
    let gini = match &model.payload {
        ModelPayload::Forest(f) => Some(gini_importance(f)?),
        _ => None,
    };
    let permutation =
        permutation_importance(&model, &test, cfg.importance_repeats, rng::derive_named(cfg.seed, "importance", 0))?;
    Ok(ImportanceReport {
        model: spec.name,
        n_train: train.n_rows(),
        n_test: test.n_rows(),
        gini,
        permutation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub c: f64,
    pub gamma: f64,
    pub report: CvReport,
}

/// Cross-validates every (C, gamma) pair on shared folds; the best point
/// by mean F1 (first in grid order on ties) is returned with the list.
pub fn svm_grid(cfg: &PipelineConfig, data: &Dataset) -> Result<(Vec<GridPoint>, usize), CliError> {
    let folds = stratified_folds(data.labels(), cfg.k_folds, cfg.seed)?;
    let base = model_spec(cfg, ModelArg::Svm);
    let mut points = Vec::new();
    for &c in &cfg.svm_grid.c {
        for &gamma in &cfg.svm_grid.gamma {
            let spec = ModelSpec {
                name: format!("SVM C={c} gamma={gamma}"),
                kind: ModelKind::Svm(SvmParams { c, gamma, ..cfg.svm }),
                ..base.clone()
            };
            let report = cross_validate_folds(&spec, data, &folds, cfg.seed)?;
            points.push(GridPoint { c, gamma, report });
        }
    }
    let best = (0..points.len()).fold(0, |b, i| {
        if points[i].report.mean.f1 > points[b].report.mean.f1 {
            i
        } else {
            b
        }
    });
    Ok((points, best))
}
