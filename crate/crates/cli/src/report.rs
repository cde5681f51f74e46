//! Output files, manifests and report formatting.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use auditml_core::dataset::SCHEMA_VERSION;
use auditml_core::eval::{ComparisonTable, CorrMatrix, CvReport, FigureAggregates};
use auditml_core::fingerprint::sha256_hex;
use auditml_core::preprocess::pipeline::PrepReport;
use auditml_core::{Dataset, LabelSpec};
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::pipeline::{GridPoint, ImportanceReport};
use crate::{CliError, FORMAT_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileRef {
    pub path: String,
    pub sha256: String,
}

impl FileRef {
    pub fn of(path: &str, bytes: &[u8]) -> Self {
        Self {
            path: path.to_string(),
            sha256: sha256_hex(bytes),
        }
    }
}

/// Collects the files a command writes so the manifest can list them.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<FileRef>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.files.push(FileRef::of(name, contents.as_bytes()));
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        self.write(name, &text)
    }

    /// Writes `manifest-<command>[-<options>].json`; no timestamps, so identical runs
    /// give identical manifests.
    pub fn finish(mut self, command: &[String], cfg: &PipelineConfig, inputs: Vec<FileRef>) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct Versions {
            auditml: &'static str,
            model_format: u32,
            dataset_schema: &'static str,
        }
        #[derive(Serialize)]
        struct Manifest<'a> {
            command: &'a [String],
            seed: u64,
            config_hash: String,
            config: &'a PipelineConfig,
            inputs: Vec<FileRef>,
            outputs: Vec<FileRef>,
            versions: Versions,
        }
        let manifest = Manifest {
            command,
            seed: cfg.seed,
            config_hash: cfg.hash(),
            config: cfg,
            inputs,
            outputs: std::mem::take(&mut self.files),
            versions: Versions {
                auditml: env!("CARGO_PKG_VERSION"),
                model_format: FORMAT_VERSION,
                dataset_schema: SCHEMA_VERSION,
            },
        };
        let stem: Vec<&str> = command.iter().map(|a| a.trim_start_matches('-')).collect();
        self.json(&format!("manifest-{}.json", stem.join("-")), &manifest)
    }
}

pub fn dataset_csv(data: &Dataset, years: &[i32]) -> String {
    let mut s = String::from("group,year,");
    for n in data.feature_names() {
        s.push_str(n);
        s.push(',');
    }
    s.push_str("label\n");
    for i in 0..data.n_rows() {
        let _ = write!(s, "{},{},", data.group_keys()[i], years[i]);
        for v in data.row(i) {
            let _ = write!(s, "{v},");
        }
        let _ = writeln!(s, "{}", data.labels()[i]);
    }
    s
}

pub fn prep_text(report: &PrepReport, data: &Dataset) -> String {
    let mut s = String::new();
    let [neg, pos] = data.class_counts();
    let _ = writeln!(s, "rows {} features {} class0 {neg} class1 {pos}", data.n_rows(), data.n_features());
    for (field, fill, n) in &report.imputed {
        if *n > 0 {
            let _ = writeln!(s, "imputed {} {n} cells with {fill}", field.key());
        }
    }
    for (field, lo, hi, n) in &report.clipped {
        let _ = writeln!(s, "clipped {} to [{lo}, {hi}] ({n} cells)", field.key());
    }
    for w in &report.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

/// Header line stating which metrics the report holds.
pub fn metrics_note(label: &LabelSpec) -> String {
    format!(
        "# binary metrics, positive class = label 1 ({}, risk percentage >= {})\n",
        label.positive_class_name, label.threshold
    )
}

const FOLD_HEADER: &str = "model,fold,n_train,n_test,tp,fp,fn,tn,accuracy,precision,recall,f1,converged\n";

fn fold_rows(s: &mut String, r: &CvReport) {
    for f in &r.folds {
        let c = &f.confusion;
        let m = &f.metrics;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.model, f.fold, f.n_train, f.n_test, c.tp, c.fp, c.fn_, c.tn, m.accuracy, m.precision, m.recall, m.f1, f.converged
        );
    }
}

pub fn folds_csv(reports: &[&CvReport]) -> String {
    let mut s = String::from(FOLD_HEADER);
    for r in reports {
        fold_rows(&mut s, r);
    }
    s
}

pub fn cv_text(r: &CvReport) -> String {
    let mut s = format!("{} stratified {}-fold cross-validation, seed {}\n", r.model, r.k, r.seed);
    s.push_str("fold accuracy precision recall f1\n");
    for f in &r.folds {
        let m = &f.metrics;
        let _ = writeln!(s, "{} {:.4} {:.4} {:.4} {:.4}", f.fold, m.accuracy, m.precision, m.recall, m.f1);
    }
    let (m, d) = (&r.mean, &r.std);
    let _ = writeln!(s, "mean {:.4} {:.4} {:.4} {:.4}", m.accuracy, m.precision, m.recall, m.f1);
    let _ = writeln!(s, "std {:.4} {:.4} {:.4} {:.4}", d.accuracy, d.precision, d.recall, d.f1);
    if !r.all_converged() {
        s.push_str("warning: solver hit its pass limit on some folds\n");
    }
    s
}

pub fn comparison_csv(t: &ComparisonTable) -> String {
    let mut s = String::from("model,mean_f1,mean_accuracy,mean_recall,mean_precision,std_f1,std_accuracy,std_recall,std_precision\n");
    for r in &t.rows {
        let (m, d) = (&r.mean, &r.std);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.model, m.f1, m.accuracy, m.recall, m.precision, d.f1, d.accuracy, d.recall, d.precision
        );
    }
    s
}

pub fn grid_csv(points: &[GridPoint]) -> String {
    let mut s = String::from("C,gamma,mean_f1,mean_accuracy,mean_recall,std_f1,converged\n");
    for p in points {
        let r = &p.report;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            p.c, p.gamma, r.mean.f1, r.mean.accuracy, r.mean.recall, r.std.f1, r.all_converged()
        );
    }
    s
}

pub fn grid_text(points: &[GridPoint], best: usize) -> String {
    let mut s = String::from("C gamma Mean_F1 Mean_Accuracy Mean_Recall\n");
    for (i, p) in points.iter().enumerate() {
        let r = &p.report;
        let mark = if i == best { " *" } else { "" };
        let _ = writeln!(s, "{} {} {:.4} {:.4} {:.4}{mark}", p.c, p.gamma, r.mean.f1, r.mean.accuracy, r.mean.recall);
    }
    s
}

pub fn importance_csv(r: &ImportanceReport) -> String {
    let p = &r.permutation;
    let mut s = String::from("feature,gini,permutation_mean,permutation_std\n");
    for (j, name) in p.feature_names.iter().enumerate() {
        let gini = r.gini.as_ref().map(|g| g[j].to_string()).unwrap_or_default();
        let _ = writeln!(s, "{name},{gini},{},{}", p.importance[j], p.std[j]);
    }
    s
}

pub fn importance_text(r: &ImportanceReport) -> String {
    let p = &r.permutation;
    let mut s = format!(
        "{} trained on {} rows, permuted on {} held-out rows, baseline F1 {:.4}\n",
        r.model, r.n_train, r.n_test, p.baseline_f1
    );
    s.push_str("rank feature permutation_drop std gini\n");
    for (rank, j) in p.ranking().into_iter().enumerate() {
        let gini = r.gini.as_ref().map(|g| format!("{:.4}", g[j])).unwrap_or_else(|| "-".into());
        let _ = writeln!(s, "{} {} {:.4} {:.4} {gini}", rank + 1, p.feature_names[j], p.importance[j], p.std[j]);
    }
    s
}

fn cell(v: Option<f64>, prec: Option<usize>) -> String {
    match (v, prec) {
        (None, _) => String::new(),
        (Some(v), None) => v.to_string(),
        (Some(v), Some(p)) => format!("{v:.p$}"),
    }
}

pub fn corr_csv(m: &CorrMatrix) -> String {
    let mut s = format!(",{}\n", m.names.join(","));
    for (name, row) in m.names.iter().zip(&m.values) {
        let cells: Vec<String> = row.iter().map(|v| cell(*v, None)).collect();
        let _ = writeln!(s, "{name},{}", cells.join(","));
    }
    s
}

pub fn corr_text(m: &CorrMatrix) -> String {
    let mut s = String::new();
    for (i, name) in m.names.iter().enumerate() {
        let cells: Vec<String> = m.values[i].iter().map(|v| format!("{:>6}", cell(*v, Some(2)))).collect();
        let _ = writeln!(s, "{:>2} {name:<28} {}", i + 1, cells.join(" "));
    }
    s
}

pub fn figure1_csv(f: &FigureAggregates) -> String {
    let mut s = String::from("firm,year,high_risk_cases\n");
    for r in &f.high_risk_by_firm_year {
        let _ = writeln!(s, "{},{},{}", r.firm, r.year, r.high_risk_cases);
    }
    s
}

pub fn figure2_csv(f: &FigureAggregates) -> String {
    let mut s = String::from("firm,industry,total_revenue_impact,std,n\n");
    for r in &f.revenue_by_firm_industry {
        let _ = writeln!(s, "{},{},{},{},{}", r.firm, r.industry, r.total_revenue_impact, r.std, r.n);
    }
    s
}

pub fn figures_text(f: &FigureAggregates) -> String {
    let mut s = String::from("High-risk cases by firm and year\n");
    for r in &f.high_risk_by_firm_year {
        let _ = writeln!(s, "{:<9} {} {:>7}", r.firm.as_str(), r.year, r.high_risk_cases);
    }
    s.push_str("\nRevenue impact by firm and industry\n");
    for r in &f.revenue_by_firm_industry {
        let _ = writeln!(
            s,
            "{:<9} {:<12} {:>12.2} (sd {:.2}, n {})",
            r.firm.as_str(),
            r.industry.as_str(),
            r.total_revenue_impact,
            r.std,
            r.n
        );
    }
    s
}
