//! Pipeline configuration: a flat `key = value` file with dotted keys.
//!
//! ```text
//! # comments run to the end of the line
//! seed = 7
//! svm.C = 100
//! gen.corr.total_audit_engagements.fraud_cases_detected = 0.3
//! ```
//!
//! Every key is optional; missing keys keep their defaults. Unknown keys
//! and malformed values are errors carrying the line number.

use std::path::{Path, PathBuf};

use auditml_core::fingerprint::sha256_hex;
use auditml_core::knn::{KnnParams, KnnWeighting};
use auditml_core::preprocess::{ClipRule, PrepPlan, SmoteParams, WindowSpec};
use auditml_core::svm::{ClassWeighting, SvmParams};
use auditml_core::synthgen::{SynthConfig, TargetCorrelation};
use auditml_core::trees::{FeatureSubset, RfParams};
use auditml_core::LabelSpec;
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DataSource {
    Csv(PathBuf),
    Generate(SynthConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvmGrid {
    pub c: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Default for SvmGrid {
    fn default() -> Self {
        Self {
            c: vec![0.1, 1.0, 10.0, 100.0],
            gamma: vec![0.01, 0.1, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub data: DataSource,
    pub label: LabelSpec,
    pub prep: PrepPlan,
    pub rf: RfParams,
    pub svm: SvmParams,
    pub svm_grid: SvmGrid,
    pub knn: KnnParams,
    /// Oversampling applied inside the KNN pipeline; `None` disables it.
    pub smote: Option<SmoteParams>,
    pub k_folds: usize,
    pub importance_repeats: usize,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            data: DataSource::Generate(SynthConfig::default()),
            label: LabelSpec::default(),
            prep: PrepPlan::default(),
            rf: RfParams::default(),
            svm: SvmParams::default(),
            svm_grid: SvmGrid::default(),
            knn: KnnParams::default(),
            smote: Some(SmoteParams::default()),
            k_folds: 5,
            importance_repeats: 10,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl PipelineConfig {
    /// Hash of every setting that influences results (the output
    /// directory is excluded).
    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.k_folds < 2 {
            return bad(format!("eval.k_folds must be >= 2, got {}", self.k_folds));
        }
        if self.importance_repeats == 0 {
            return bad("eval.importance_repeats must be >= 1".into());
        }
        match &self.data {
            DataSource::Csv(p) if !p.is_file() => return bad(format!("data.path {} does not exist", p.display())),
            DataSource::Generate(g) => g.validate().map_err(|e| CliError::Config(e.to_string()))?,
            _ => {}
        }
        self.label.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(c) = &self.prep.clip {
            c.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        if let Some(w) = &self.prep.window {
            w.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        self.svm.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.svm_grid.c.is_empty() || self.svm_grid.gamma.is_empty() {
            return bad("svm.grid.C and svm.grid.gamma must be non-empty".into());
        }
        if self.rf.n_estimators == 0 {
            return bad("rf.n_estimators must be >= 1".into());
        }
        if self.knn.k == 0 {
            return bad("knn.k must be >= 1".into());
        }
        if let Some(s) = &self.smote {
            if s.k == 0 || !(s.target_ratio > 0.0 && s.target_ratio <= 1.0) {
                return bad("smote.k must be >= 1 and smote.ratio in (0, 1]".into());
            }
        }
        Ok(())
    }
}

struct Line<'a> {
    no: usize,
    key: &'a str,
    value: &'a str,
}

impl Line<'_> {
    fn err(&self, what: &str) -> CliError {
        CliError::Config(format!("line {}: {} expects {what}, got {:?}", self.no, self.key, self.value))
    }

    fn f64(&self) -> Result<f64, CliError> {
        self.value.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| self.err("a number"))
    }

    fn usize(&self) -> Result<usize, CliError> {
        self.value.parse().map_err(|_| self.err("a non-negative integer"))
    }

    fn u64(&self) -> Result<u64, CliError> {
        self.value.parse().map_err(|_| self.err("a non-negative integer"))
    }

    fn bool(&self) -> Result<bool, CliError> {
        match self.value {
            "true" | "yes" | "on" => Ok(true),
            "false" | "no" | "off" => Ok(false),
            _ => Err(self.err("true or false")),
        }
    }

    fn list(&self) -> Result<Vec<f64>, CliError> {
        self.value
            .split(',')
            .map(|s| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| self.err("a comma-separated list of numbers"))
    }
}

pub fn load_config(path: &Path) -> Result<PipelineConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Parses config text on top of the defaults. Path validation happens
/// separately in [`PipelineConfig::validate`].
pub fn parse_config(text: &str) -> Result<PipelineConfig, CliError> {
    let mut cfg = PipelineConfig::default();
    let mut synth = SynthConfig::default();
    let mut corr: Vec<TargetCorrelation> = Vec::new();
    let mut data_path: Option<PathBuf> = None;
    let mut gen_line: Option<usize> = None;
    let mut seen: Vec<(String, usize)> = Vec::new();
    let mut unknown: Vec<String> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(CliError::Config(format!("line {no}: expected key = value, got {content:?}")));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(CliError::Config(format!("line {no}: empty key or value")));
        }
        if let Some((_, first)) = seen.iter().find(|(k, _)| k == key) {
            return Err(CliError::Config(format!("line {no}: duplicate key {key} (first set on line {first})")));
        }
        seen.push((key.to_string(), no));
        let l = Line { no, key, value };
        if key.starts_with("gen.") {
            gen_line.get_or_insert(no);
        }

        match key {
            "seed" => cfg.seed = l.u64()?,
            "data.path" => data_path = Some(PathBuf::from(value)),
            "gen.n_records" => synth.n_records = l.usize()?,
            "gen.year_min" => synth.years.0 = value.parse().map_err(|_| l.err("a year"))?,
            "gen.year_max" => synth.years.1 = value.parse().map_err(|_| l.err("a year"))?,
            "gen.noise_level" => synth.noise_level = l.f64()?,
            "gen.positive_rate_hint" => synth.positive_rate_hint = l.f64()?,
            "gen.missing_rate" => synth.missing_rate = l.f64()?,
            "label.tau" => cfg.label.threshold = l.f64()?,
            "prep.clip" => {
                if !l.bool()? {
                    cfg.prep.clip = None
                }
            }
            "prep.clip.q_low" => cfg.prep.clip.get_or_insert_with(ClipRule::default).q_low = l.f64()?,
            "prep.clip.q_high" => cfg.prep.clip.get_or_insert_with(ClipRule::default).q_high = l.f64()?,
            "prep.derive" => {
                if !l.bool()? {
                    cfg.prep.derive = None
                }
            }
            "prep.window.length" => cfg.prep.window.get_or_insert_with(WindowSpec::default).length = l.usize()?,
            "prep.window.stride" => cfg.prep.window.get_or_insert_with(WindowSpec::default).stride = l.usize()?,
            "rf.n_estimators" => cfg.rf.n_estimators = l.usize()?,
            "rf.max_depth" => cfg.rf.tree.max_depth = if value == "none" { None } else { Some(l.usize()?) },
            "rf.min_samples_split" => cfg.rf.tree.min_samples_split = l.usize()?,
            "rf.min_samples_leaf" => cfg.rf.tree.min_samples_leaf = l.usize()?,
            "rf.max_features" => {
                cfg.rf.tree.features_per_split = match value {
                    "sqrt" => FeatureSubset::Sqrt,
                    "all" => FeatureSubset::All,
                    _ => FeatureSubset::Count(l.usize().map_err(|_| l.err("sqrt, all or an integer"))?),
                }
            }
            "rf.bootstrap" => cfg.rf.bootstrap = l.bool()?,
            "svm.C" => cfg.svm.c = l.f64()?,
            "svm.gamma" => cfg.svm.gamma = l.f64()?,
            "svm.tol" => cfg.svm.tolerance = l.f64()?,
            "svm.max_passes" => cfg.svm.max_passes = l.usize()?,
            "svm.class_weight" => {
                cfg.svm.class_weighting = match value {
                    "balanced" => ClassWeighting::Balanced,
                    "none" => ClassWeighting::None,
                    _ => return Err(l.err("balanced or none")),
                }
            }
            "svm.grid.C" => cfg.svm_grid.c = l.list()?,
            "svm.grid.gamma" => cfg.svm_grid.gamma = l.list()?,
            "knn.k" => cfg.knn.k = l.usize()?,
            "knn.weights" => {
                cfg.knn.weighting = match value {
                    "distance" => KnnWeighting::Distance,
                    "uniform" => KnnWeighting::Uniform,
                    _ => return Err(l.err("distance or uniform")),
                }
            }
            "smote.enabled" => {
                if !l.bool()? {
                    cfg.smote = None
                }
            }
            "smote.k" => cfg.smote.get_or_insert_with(SmoteParams::default).k = l.usize()?,
            "smote.ratio" => cfg.smote.get_or_insert_with(SmoteParams::default).target_ratio = l.f64()?,
            "eval.k_folds" => cfg.k_folds = l.usize()?,
            "eval.importance_repeats" => cfg.importance_repeats = l.usize()?,
            "output.dir" => cfg.output_dir = PathBuf::from(value),
            _ => match key.strip_prefix("gen.corr.").and_then(|r| r.split_once('.')) {
                Some((a, b)) if !a.is_empty() && !b.is_empty() && !b.contains('.') => {
                    corr.push(TargetCorrelation::new(a, b, l.f64()?))
                }
                _ => unknown.push(format!("{key} (line {no})")),
            },
        }
    }
    if !unknown.is_empty() {
        return Err(CliError::Config(format!("unknown keys: {}", unknown.join(", "))));
    }
    if !corr.is_empty() {
        synth.target_correlations = corr;
    }
    synth.label_threshold = cfg.label.threshold;
    cfg.data = match (data_path, gen_line) {
        (Some(_), Some(no)) => {
            return Err(CliError::Config(format!(
                "line {no}: gen.* keys conflict with data.path; configure exactly one data source"
            )))
        }
        (Some(p), None) => DataSource::Csv(p),
        (None, _) => DataSource::Generate(synth),
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default_pipeline() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, PipelineConfig::default());
        assert_eq!(cfg.rf.n_estimators, 200);
        assert_eq!(cfg.rf.tree.max_depth, Some(15));
        assert_eq!(cfg.rf.tree.min_samples_split, 10);
        assert_eq!(cfg.rf.tree.min_samples_leaf, 5);
        assert!(cfg.rf.bootstrap);
        assert_eq!(cfg.rf.tree.features_per_split, FeatureSubset::Sqrt);
        assert_eq!((cfg.svm.c, cfg.svm.gamma), (10.0, 0.1));
        assert_eq!(cfg.svm.class_weighting, ClassWeighting::Balanced);
        assert_eq!((cfg.knn.k, cfg.knn.weighting), (5, KnnWeighting::Distance));
        assert_eq!(cfg.k_folds, 5);
        assert_eq!(cfg.label.threshold, 0.15);
    }

    #[test]
    fn single_override_keeps_other_defaults() {
        let cfg = parse_config("svm.C = 100\n").unwrap();
        let want = PipelineConfig {
            svm: SvmParams { c: 100.0, ..Default::default() },
            ..Default::default()
        };
        assert_eq!(cfg, want);
    }

    #[test]
    fn misspelled_key_is_named() {
        let err = parse_config("seed = 1\nsvm.gama = 0.5\n").unwrap_err().to_string();
        assert!(err.contains("svm.gama") && err.contains("line 2"), "{err}");
    }

    #[test]
    fn type_errors_carry_line_numbers() {
        let err = parse_config("# header\n\nknn.k = five\n").unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("knn.k"), "{err}");
    }

    #[test]
    fn comments_and_correlation_keys() {
        let text = "gen.n_records = 300 # small\ngen.corr.total_audit_engagements.fraud_cases_detected = 0.3\n";
        let cfg = parse_config(text).unwrap();
        let DataSource::Generate(g) = &cfg.data else { panic!() };
        assert_eq!(g.n_records, 300);
        assert_eq!(g.target_correlations, vec![TargetCorrelation::new("total_audit_engagements", "fraud_cases_detected", 0.3)]);
    }

    #[test]
    fn two_data_sources_rejected() {
        assert!(parse_config("data.path = x.csv\ngen.n_records = 10\n").is_err());
    }

    #[test]
    fn duplicate_key_rejected() {
        assert!(parse_config("seed = 1\nseed = 2\n").is_err());
    }

    #[test]
    fn validation_checks_folds_and_paths() {
        let mut cfg = PipelineConfig { k_folds: 1, ..Default::default() };
        assert!(cfg.validate().is_err());
        cfg.k_folds = 5;
        cfg.data = DataSource::Csv("/nonexistent/data.csv".into());
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = PipelineConfig::default();
        let b = PipelineConfig { output_dir: "elsewhere".into(), ..Default::default() };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), PipelineConfig { seed: 1, ..Default::default() }.hash());
    }
}
