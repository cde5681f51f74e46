//! Cleaning, feature engineering, scaling and oversampling.
//!
//! The standard order is impute, clip, derive features, optionally
//! windowize, encode, scale and (on training folds only) SMOTE.
//! [`pipeline::Preprocessor`] bundles the record-level steps so they can
//! be fitted once and replayed on new data.

pub mod clip;
pub mod derive;
pub mod encode;
pub mod impute;
pub mod pipeline;
pub mod quantile;
pub mod scale;
pub mod smote;
pub mod window;

pub use clip::{clip_outliers, ClipBounds, ClipRule};
pub use derive::{derive_features, DerivedFeatures};
pub use encode::{Binning, EncodedTable, EncodingPlan, FittedEncoder};
pub use impute::{impute, FittedImputer, ImputePolicy};
pub use pipeline::{PrepPlan, Preprocessor};
pub use scale::{apply_scaler, fit_scaler, FittedTransform, ScalerKind};
pub use smote::{smote, SmoteParams};
pub use window::{windowize, WindowSpec};
