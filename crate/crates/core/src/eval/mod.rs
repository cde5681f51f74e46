//! Cross-validation, metrics, model comparison and reporting helpers.

mod corr;
mod cv;
mod figures;
mod folds;
mod importance;
mod metrics;

pub use corr::{pearson, pearson_matrix, record_column, record_columns, record_correlations, CorrMatrix, RISK_PERCENTAGE};
pub use cv::{
    compare_models, cross_validate, cross_validate_folds, fit_fold, fold_seed, ComparisonTable, CvReport, FoldResult,
};
pub use figures::{figure_aggregates, FigureAggregates, FirmIndustryRevenue, FirmYearTotal};
pub use folds::{stratified_folds, training_indices};
pub use importance::{permutation_importance, PermutationImportance};
pub use metrics::{f1_score, ConfusionMatrix, Metrics};
