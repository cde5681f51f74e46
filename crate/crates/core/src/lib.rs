//! Audit-risk classification toolkit.
//!
//! The crate covers the whole modelling path for firm-year audit records:
//! schema and CSV handling ([`record`]), label derivation ([`label`]),
//! seeded synthetic data ([`synthgen`]), cleaning and feature engineering
//! ([`preprocess`]), three classifiers ([`trees`], [`svm`], [`knn`]) and
//! stratified evaluation with reporting helpers ([`eval`]).

pub mod dataset;
pub mod error;
pub mod eval;
pub mod fingerprint;
pub mod knn;
pub mod label;
pub mod model;
pub mod preprocess;
pub mod record;
pub mod rng;
pub mod svm;
pub mod synthgen;
pub mod trees;

pub use dataset::{ColumnKind, Dataset};
pub use error::{Error, Result};
pub use label::LabelSpec;
pub use model::{ModelKind, ModelSpec, TrainedModel};
pub use record::{AuditRecord, Firm, Industry};
