use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("schema error: missing columns [{}], unexpected columns [{}]", missing.join(", "), extra.join(", "))]
    Schema {
        missing: Vec<String>,
        extra: Vec<String>,
    },

    #[error("data error at row {row}, column {column}: cannot parse {value:?} ({reason})")]
    Data {
        row: usize,
        column: String,
        value: String,
        reason: String,
    },

    #[error("consistency error at row {row}: {detail}")]
    Consistency { row: usize, detail: String },

    #[error("labeling error at row {row}: {detail}")]
    Labeling { row: usize, detail: String },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("dataset construction error: {0}")]
    Construction(String),

    #[error("imputation error: column {0} has no observed values")]
    Imputation(String),

    #[error("plan error: {0}")]
    Plan(String),

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("transform error: {detail} (differing features: [{}])", differing.join(", "))]
    Transform {
        detail: String,
        differing: Vec<String>,
    },

    #[error("window error: {0}")]
    Window(String),

    #[error("resampling error: {0}")]
    Resampling(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("undefined impurity: {0}")]
    Impurity(String),

    #[error("undefined importance: {0}")]
    Importance(String),

    #[error("prediction error: expected row width {expected}, got {actual}")]
    Width { expected: usize, actual: usize },

    #[error("kernel error: dimension mismatch ({0} vs {1})")]
    Kernel(usize, usize),

    #[error("class weighting error: {0}")]
    Weighting(String),

    #[error("scaler mismatch: model expects {expected}, query carries {actual}")]
    ScalerMismatch { expected: String, actual: String },

    #[error("stratification error: class {class} has {count} samples, too few for K={k} folds")]
    Stratification { class: u8, count: usize, k: usize },

    #[error("fold {fold}: {source}")]
    Fold { fold: usize, source: Box<Error> },

    #[error("generation error: {0}")]
    Generation(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Training-side failures (as opposed to malformed input data).
    pub fn is_training(&self) -> bool {
        match self {
            Error::Training(_)
            | Error::Weighting(_)
            | Error::Stratification { .. }
            | Error::Resampling(_)
            | Error::Impurity(_)
            | Error::Importance(_) => true,
            Error::Fold { source, .. } => source.is_training(),
            _ => false,
        }
    }
}
