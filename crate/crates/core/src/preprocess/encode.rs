//! Record → numeric row encoding: pass-through numerics, booleans as 0/1,
//! binning, ordinal codes and one-hot blocks.

use std::collections::BTreeSet;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::{ColumnKind, Dataset};
use crate::error::{Error, Result};
use crate::preprocess::quantile::quantile_sorted;
use crate::record::{AuditRecord, Field, FieldKind, Firm, Industry};

/// Category column that absorbs values unseen at fit time.
pub const OTHER_CATEGORY: &str = "__other__";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Binning {
    /// Left-inclusive edges; values below the first edge fall in bin 0,
    /// values at or above the last edge in the last bin.
    Edges(Vec<f64>),
    /// Equal-frequency bins computed from the fit data.
    Quantiles(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingPlan {
    pub numeric: Vec<Field>,
    pub one_hot: Vec<Field>,
    pub ordinal: Vec<(Field, Vec<String>)>,
    pub bins: Vec<(Field, Binning)>,
    /// Fields deliberately left out of the feature matrix.
    pub drop: Vec<Field>,
    /// Field whose value keys rows into groups (firm by default).
    pub group_by: Field,
}

impl Default for EncodingPlan {
    /// Measures, year and the AI flag as numeric columns. High-risk cases
    /// are the label source and the categoricals stay out of the matrix.
    fn default() -> Self {
        Self {
            numeric: vec![
                Field::Year,
                Field::TotalAuditEngagements,
                Field::ComplianceViolations,
                Field::FraudCasesDetected,
                Field::TotalRevenueImpact,
                Field::AiUsedForAuditing,
                Field::EmployeeWorkload,
                Field::MarketValue,
            ],
            one_hot: vec![],
            ordinal: vec![],
            bins: vec![],
            drop: vec![
                Field::FirmName,
                Field::HighRiskCases,
                Field::IndustryAffected,
                Field::Region,
                Field::FinancialStatus,
            ],
            group_by: Field::FirmName,
        }
    }
}

impl EncodingPlan {
    fn used_fields(&self) -> Vec<Field> {
        self.numeric
            .iter()
            .copied()
            .chain(self.bins.iter().map(|b| b.0))
            .chain(self.ordinal.iter().map(|o| o.0))
            .chain(self.one_hot.iter().copied())
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for f in self.used_fields().into_iter().chain(self.drop.iter().copied()) {
            if !seen.insert(f) {
                return Err(Error::Plan(format!("field {f} appears more than once")));
            }
        }
        for f in &self.numeric {
            if f.is_categorical() {
                return Err(Error::Plan(format!("categorical field {f} cannot be numeric")));
            }
        }
        for (f, binning) in &self.bins {
            if !f.is_measure() {
                return Err(Error::Plan(format!("cannot bin non-measure field {f}")));
            }
            match binning {
                Binning::Edges(edges) => {
                    if edges.len() < 2 {
                        return Err(Error::Plan(format!("bins for {f} need at least two edges")));
                    }
                    if edges.windows(2).any(|w| !(w[0] < w[1])) {
                        return Err(Error::Plan(format!("bin edges for {f} are not strictly increasing")));
                    }
                }
                Binning::Quantiles(q) if *q < 2 => {
                    return Err(Error::Plan(format!("quantile binning for {f} needs at least 2 bins")));
                }
                Binning::Quantiles(_) => {}
            }
        }
        for (f, levels) in &self.ordinal {
            if !f.is_categorical() && f.kind() != FieldKind::Boolean {
                return Err(Error::Plan(format!("ordinal field {f} is not categorical")));
            }
            if levels.is_empty() {
                return Err(Error::Plan(format!("ordinal field {f} has no levels")));
            }
        }
        for f in &self.one_hot {
            if !f.is_categorical() && f.kind() != FieldKind::Boolean {
                return Err(Error::Plan(format!("one-hot field {f} is not categorical")));
            }
        }
        for f in Field::ALL.into_iter().filter(|f| f.is_categorical()) {
            if !seen.contains(&f) {
                return Err(Error::Plan(format!(
                    "categorical field {f} is not covered (one-hot, ordinal or drop)"
                )));
            }
        }
        if !self.group_by.is_categorical() && self.group_by.kind() != FieldKind::Boolean {
            return Err(Error::Plan(format!("group_by field {} is not categorical", self.group_by)));
        }
        Ok(())
    }
}

/// Numeric rows ready to become a [`Dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedTable {
    pub names: Vec<String>,
    pub kinds: Vec<ColumnKind>,
    pub values: Array2<f64>,
    pub group_keys: Vec<String>,
}

impl EncodedTable {
    /// Inserts extra numeric columns after the plan's non-one-hot columns.
    pub fn insert_columns(&mut self, names: &[&str], columns: &[Vec<f64>]) {
        let at = self.kinds.iter().take_while(|k| k.is_numeric()).count();
        let n = self.values.nrows();
        let mut values = Array2::zeros((n, self.names.len() + names.len()));
        for i in 0..n {
            let mut j_out = 0;
            for j in 0..self.names.len() {
                if j == at {
                    for c in columns {
                        values[[i, j_out]] = c[i];
                        j_out += 1;
                    }
                }
                values[[i, j_out]] = self.values[[i, j]];
                j_out += 1;
            }
            if at == self.names.len() {
                for c in columns {
                    values[[i, j_out]] = c[i];
                    j_out += 1;
                }
            }
        }
        for (k, name) in names.iter().enumerate() {
            self.names.insert(at + k, name.to_string());
            self.kinds.insert(at + k, ColumnKind::Derived);
        }
        self.values = values;
    }

    pub fn into_dataset(self, labels: Vec<u8>) -> Result<Dataset> {
        Dataset::new(self.values, self.names, self.kinds, labels, self.group_keys)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedEncoder {
    pub plan: EncodingPlan,
    /// Resolved edges per binned field, in plan order.
    pub bin_edges: Vec<(Field, Vec<f64>)>,
    /// Categories per one-hot field, in column order.
    pub categories: Vec<(Field, Vec<String>)>,
}

fn closed_levels(field: Field) -> Option<Vec<String>> {
    let mut levels: Vec<String> = match field {
        Field::FirmName => Firm::ALL.iter().map(|f| f.to_string()).collect(),
        Field::IndustryAffected => Industry::ALL.iter().map(|i| i.to_string()).collect(),
        Field::AiUsedForAuditing => vec!["No".into(), "Yes".into()],
        _ => return None,
    };
    levels.sort();
    Some(levels)
}

fn bin_index(edges: &[f64], x: f64) -> f64 {
    let n_bins = edges.len() - 1;
    let at_or_below = edges.partition_point(|&e| e <= x);
    at_or_below.saturating_sub(1).min(n_bins - 1) as f64
}

impl FittedEncoder {
    pub fn fit(records: &[AuditRecord], plan: &EncodingPlan) -> Result<Self> {
        plan.validate()?;
        let mut bin_edges = Vec::new();
        for (field, binning) in &plan.bins {
            let edges = match binning {
                Binning::Edges(e) => e.clone(),
                Binning::Quantiles(q) => {
                    let mut v: Vec<f64> = records.iter().filter_map(|r| r.numeric(*field)).collect();
                    if v.is_empty() {
                        return Err(Error::Plan(format!("no values to derive bins for {field}")));
                    }
                    v.sort_by(f64::total_cmp);
                    let mut edges = vec![f64::NEG_INFINITY];
                    for i in 1..*q {
                        let e = quantile_sorted(&v, i as f64 / *q as f64);
                        if e > *edges.last().unwrap() {
                            edges.push(e);
                        }
                    }
                    edges.push(f64::INFINITY);
                    edges
                }
            };
            bin_edges.push((*field, edges));
        }
        let mut categories = Vec::new();
        for &field in &plan.one_hot {
            let levels = match closed_levels(field) {
                Some(l) => l,
                None => {
                    let observed: BTreeSet<String> = records.iter().filter_map(|r| r.category(field)).collect();
                    let mut l: Vec<String> = observed.into_iter().collect();
                    l.push(OTHER_CATEGORY.into());
                    l
                }
            };
            categories.push((field, levels));
        }
        Ok(Self {
            plan: plan.clone(),
            bin_edges,
            categories,
        })
    }

    pub fn feature_names(&self) -> (Vec<String>, Vec<ColumnKind>) {
        let mut names = Vec::new();
        let mut kinds = Vec::new();
        for f in &self.plan.numeric {
            names.push(f.key().to_string());
            kinds.push(ColumnKind::Numeric);
        }
        for (f, _) in &self.bin_edges {
            names.push(format!("{}_bin", f.key()));
            kinds.push(ColumnKind::Binned);
        }
        for (f, _) in &self.plan.ordinal {
            names.push(format!("{}_ord", f.key()));
            kinds.push(ColumnKind::Ordinal);
        }
        for (f, levels) in &self.categories {
            for level in levels {
                names.push(format!("{}={}", f.key(), level));
                kinds.push(ColumnKind::OneHot);
            }
        }
        (names, kinds)
    }

    pub fn transform(&self, records: &[AuditRecord]) -> Result<EncodedTable> {
        let (names, kinds) = self.feature_names();
        let mut values = Array2::zeros((records.len(), names.len()));
        let missing = |row: usize, f: Field| {
            Error::Construction(format!("residual missing value at row {}, field {f}", row + 1))
        };
        for (i, r) in records.iter().enumerate() {
            let mut j = 0;
            for &f in &self.plan.numeric {
                values[[i, j]] = r.numeric(f).ok_or_else(|| missing(i, f))?;
                j += 1;
            }
            for (f, edges) in &self.bin_edges {
                let x = r.numeric(*f).ok_or_else(|| missing(i, *f))?;
                values[[i, j]] = bin_index(edges, x);
                j += 1;
            }
            for (f, levels) in &self.plan.ordinal {
                let c = r.category(*f).ok_or_else(|| missing(i, *f))?;
                let code = levels.iter().position(|l| *l == c).ok_or_else(|| {
                    Error::Encoding(format!("unseen level {c:?} for ordinal field {f} at row {}", i + 1))
                })?;
                values[[i, j]] = code as f64;
                j += 1;
            }
            for (f, levels) in &self.categories {
                let c = r.category(*f).ok_or_else(|| missing(i, *f))?;
                let k = match levels.iter().position(|l| *l == c) {
                    Some(k) => k,
                    None if f.is_open_vocabulary() => levels.len() - 1,
                    None => {
                        return Err(Error::Encoding(format!(
                            "unseen category {c:?} for {f} at row {}",
                            i + 1
                        )))
                    }
                };
                values[[i, j + k]] = 1.0;
                j += levels.len();
            }
        }
        let group_keys = records
            .iter()
            .map(|r| r.category(self.plan.group_by).unwrap_or_default())
            .collect();
        Ok(EncodedTable {
            names,
            kinds,
            values,
            group_keys,
        })
    }
}
