//! Immutable numeric datasets.

use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fingerprint::Fingerprinter;
use crate::preprocess::encode::{EncodingPlan, FittedEncoder};
use crate::record::AuditRecord;

pub const SCHEMA_VERSION: &str = "auditml-dataset/1";

/// Where a feature column came from; windowing lags only numeric columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnKind {
    Numeric,
    Binned,
    Ordinal,
    OneHot,
    Derived,
}

impl ColumnKind {
    pub fn is_numeric(self) -> bool {
        !matches!(self, ColumnKind::OneHot)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    /// Only one class present; training operations reject such datasets.
    pub single_class: bool,
    /// Per-row flag for rows created by oversampling.
    pub synthetic: Vec<bool>,
    /// Fingerprint of the scaler applied to `features`, if any.
    pub scaler_fingerprint: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    feature_names: Vec<String>,
    column_kinds: Vec<ColumnKind>,
    labels: Vec<u8>,
    group_keys: Vec<String>,
    schema_version: String,
    meta: DatasetMeta,
}

impl Dataset {
    pub fn new(
        features: Array2<f64>,
        feature_names: Vec<String>,
        column_kinds: Vec<ColumnKind>,
        labels: Vec<u8>,
        group_keys: Vec<String>,
    ) -> Result<Self> {
        let n = features.nrows();
        if n == 0 {
            return Err(Error::EmptyDataset("no rows".into()));
        }
        if labels.len() != n || group_keys.len() != n {
            return Err(Error::Construction(format!(
                "row count mismatch: {} feature rows, {} labels, {} group keys",
                n,
                labels.len(),
                group_keys.len()
            )));
        }
        if feature_names.len() != features.ncols() || column_kinds.len() != features.ncols() {
            return Err(Error::Construction(format!(
                "{} columns but {} names and {} kinds",
                features.ncols(),
                feature_names.len(),
                column_kinds.len()
            )));
        }
        if let Some(((i, j), _)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Construction(format!(
                "missing or non-finite value at row {}, feature {}",
                i + 1,
                feature_names[j]
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::Construction(format!("label {bad} is not binary")));
        }
        let single_class = labels.iter().all(|&l| l == labels[0]);
        Ok(Self {
            features,
            feature_names,
            column_kinds,
            labels,
            group_keys,
            schema_version: SCHEMA_VERSION.into(),
            meta: DatasetMeta {
                single_class,
                synthetic: vec![false; n],
                scaler_fingerprint: None,
            },
        })
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.features.column(j)
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn column_kinds(&self) -> &[ColumnKind] {
        &self.column_kinds
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn group_keys(&self) -> &[String] {
        &self.group_keys
    }

    pub fn schema_version(&self) -> &str {
        &self.schema_version
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    /// Counts of label 0 and label 1.
    pub fn class_counts(&self) -> [usize; 2] {
        let pos = self.labels.iter().filter(|&&l| l == 1).count();
        [self.labels.len() - pos, pos]
    }

    pub fn require_both_classes(&self, what: &str) -> Result<()> {
        if self.meta.single_class {
            return Err(Error::Training(format!(
                "{what} requires both classes, dataset has only class {}",
                self.labels[0]
            )));
        }
        Ok(())
    }

    /// Content fingerprint over names, labels and feature bits.
    pub fn fingerprint(&self) -> String {
        let mut fp = Fingerprinter::new();
        fp.u64(self.n_rows() as u64).u64(self.n_features() as u64);
        for name in &self.feature_names {
            fp.str(name);
        }
        for &v in self.features.iter() {
            fp.f64(v);
        }
        for &l in &self.labels {
            fp.u64(l as u64);
        }
        fp.finish()
    }

    /// Rows at `indices`, in that order (duplicates allowed).
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        let features = self.features.select(Axis(0), indices);
        let pick = |v: &Vec<bool>| indices.iter().map(|&i| v[i]).collect();
        let labels: Vec<u8> = indices.iter().map(|&i| self.labels[i]).collect();
        let single_class = labels.iter().all(|&l| Some(&l) == labels.first());
        Dataset {
            features,
            feature_names: self.feature_names.clone(),
            column_kinds: self.column_kinds.clone(),
            labels,
            group_keys: indices.iter().map(|&i| self.group_keys[i].clone()).collect(),
            schema_version: self.schema_version.clone(),
            meta: DatasetMeta {
                single_class,
                synthetic: pick(&self.meta.synthetic),
                scaler_fingerprint: self.meta.scaler_fingerprint.clone(),
            },
        }
    }

    /// Same rows and labels with a replaced feature matrix of equal shape.
    pub(crate) fn with_scaled_features(&self, features: Array2<f64>, scaler: String) -> Dataset {
        debug_assert_eq!(features.dim(), self.features.dim());
        let mut out = self.clone();
        out.features = features;
        out.meta.scaler_fingerprint = Some(scaler);
        out
    }

    /// Same rows with one column overwritten.
    pub fn with_column(&self, j: usize, values: &[f64]) -> Dataset {
        let mut out = self.clone();
        out.features
            .column_mut(j)
            .iter_mut()
            .zip(values)
            .for_each(|(dst, &v)| *dst = v);
        out
    }

    /// Appends rows flagged as synthetic.
    pub(crate) fn append_synthetic(
        &self,
        rows: Array2<f64>,
        labels: Vec<u8>,
        group_keys: Vec<String>,
    ) -> Dataset {
        let mut out = self.clone();
        let added = rows.nrows();
        out.features = ndarray::concatenate(Axis(0), &[self.features.view(), rows.view()])
            .expect("matching widths");
        out.labels.extend(labels);
        out.group_keys.extend(group_keys);
        out.meta.synthetic.extend(std::iter::repeat_n(true, added));
        out.meta.single_class = out.labels.iter().all(|&l| l == out.labels[0]);
        out
    }
}

/// Encodes fully imputed records with `plan` and pairs them with labels.
///
/// Column order: plan fields in plan order, then one-hot blocks with
/// categories in lexicographic order.
pub fn build_dataset(
    records: &[AuditRecord],
    plan: &EncodingPlan,
    labels: &[u8],
) -> Result<(Dataset, FittedEncoder)> {
    if records.is_empty() {
        return Err(Error::EmptyDataset("no records".into()));
    }
    if records.len() != labels.len() {
        return Err(Error::Construction(format!(
            "{} records but {} labels",
            records.len(),
            labels.len()
        )));
    }
    let encoder = FittedEncoder::fit(records, plan)?;
    let table = encoder.transform(records)?;
    let ds = table.into_dataset(labels.to_vec())?;
    Ok((ds, encoder))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::encode::EncodingPlan;
    use crate::record::{Field, Firm, Industry};
    use ndarray::array;

    fn full_record(year: i32, firm: Firm, industry: Industry) -> AuditRecord {
        AuditRecord {
            year,
            firm_name: firm,
            total_audit_engagements: Some(100),
            high_risk_cases: Some(10),
            compliance_violations: Some(3),
            fraud_cases_detected: Some(1),
            industry_affected: Some(industry),
            total_revenue_impact: Some(12.5),
            ai_used_for_auditing: Some(true),
            employee_workload: Some(45.0),
            market_value: Some(300.0),
            region: Some("EMEA".into()),
            financial_status: Some("Stable".into()),
        }
    }

    fn small_plan() -> EncodingPlan {
        EncodingPlan {
            numeric: vec![Field::TotalAuditEngagements, Field::EmployeeWorkload],
            one_hot: vec![Field::FirmName],
            ordinal: vec![],
            bins: vec![],
            drop: vec![
                Field::Year,
                Field::HighRiskCases,
                Field::ComplianceViolations,
                Field::FraudCasesDetected,
                Field::IndustryAffected,
                Field::TotalRevenueImpact,
                Field::AiUsedForAuditing,
                Field::MarketValue,
                Field::Region,
                Field::FinancialStatus,
            ],
            group_by: Field::FirmName,
        }
    }

    #[test]
    fn column_count_follows_plan() {
        let recs = vec![
            full_record(2020, Firm::EY, Industry::Tech),
            full_record(2021, Firm::KPMG, Industry::Tech),
            full_record(2022, Firm::PwC, Industry::Tech),
        ];
        let (ds, _) = build_dataset(&recs, &small_plan(), &[0, 1, 0]).unwrap();
        assert_eq!(ds.features().dim(), (3, 6));
        assert_eq!(
            ds.feature_names(),
            &[
                "total_audit_engagements",
                "employee_workload",
                "firm_name=Deloitte",
                "firm_name=EY",
                "firm_name=KPMG",
                "firm_name=PwC"
            ]
        );
        assert!(!ds.meta().single_class);
    }

    #[test]
    fn empty_records_rejected() {
        assert!(matches!(
            build_dataset(&[], &small_plan(), &[]),
            Err(Error::EmptyDataset(_))
        ));
    }

    #[test]
    fn single_class_is_flagged_not_rejected() {
        let recs = vec![full_record(2020, Firm::EY, Industry::Tech); 3];
        let (ds, _) = build_dataset(&recs, &small_plan(), &[1, 1, 1]).unwrap();
        assert!(ds.meta().single_class);
        assert!(ds.require_both_classes("training").is_err());
    }

    #[test]
    fn residual_missing_rejected() {
        let mut r = full_record(2020, Firm::EY, Industry::Tech);
        r.employee_workload = None;
        assert!(build_dataset(&[r], &small_plan(), &[0]).is_err());
    }

    #[test]
    fn column_order_is_stable() {
        let recs = vec![
            full_record(2020, Firm::PwC, Industry::Tech),
            full_record(2021, Firm::EY, Industry::Retail),
        ];
        let a = build_dataset(&recs, &small_plan(), &[0, 1]).unwrap().0;
        let b = build_dataset(&recs, &small_plan(), &[0, 1]).unwrap().0;
        assert_eq!(a.feature_names(), b.feature_names());
        assert_eq!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn new_checks_shapes() {
        let x = array![[1.0, 2.0], [3.0, 4.0]];
        let kinds = vec![ColumnKind::Numeric; 2];
        assert!(Dataset::new(x.clone(), vec!["a".into()], kinds.clone(), vec![0, 1], vec!["g".into(); 2]).is_err());
        assert!(Dataset::new(x.clone(), vec!["a".into(), "b".into()], kinds.clone(), vec![0], vec!["g".into(); 2]).is_err());
        let ds = Dataset::new(x, vec!["a".into(), "b".into()], kinds, vec![0, 1], vec!["g".into(); 2]).unwrap();
        assert_eq!(ds.select_rows(&[1, 1]).labels(), &[1, 1]);
        assert!(ds.select_rows(&[1, 1]).meta().single_class);
    }
}
