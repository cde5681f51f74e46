use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::Result;
use crate::preprocess::clip::{ClipBounds, ClipRule};
use crate::preprocess::derive::{derive_features, DeriveSpec};
use crate::preprocess::encode::{EncodingPlan, FittedEncoder};
use crate::preprocess::impute::{FillValue, FittedImputer, ImputePolicy};
use crate::preprocess::window::{windowize, WindowSpec};
use crate::record::{AuditRecord, Field};

/// Record-level preprocessing configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepPlan {
    pub impute: ImputePolicy,
    pub clip: Option<ClipRule>,
    pub derive: Option<DeriveSpec>,
    pub encoding: EncodingPlan,
    pub window: Option<WindowSpec>,
}

impl Default for PrepPlan {
    fn default() -> Self {
        Self {
            impute: ImputePolicy::default(),
            clip: Some(ClipRule::default()),
            derive: Some(DeriveSpec::default()),
            encoding: EncodingPlan::default(),
            window: None,
        }
    }
}

/// Statistics gathered while fitting and applying the record steps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PrepReport {
    pub imputed: Vec<(Field, FillValue, usize)>,
    pub clipped: Vec<(Field, f64, f64, usize)>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub dataset: Dataset,
    /// Year of each dataset row.
    pub years: Vec<i32>,
    pub report: PrepReport,
}

/// Fitted impute/clip/encode state, replayable on new records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub plan: PrepPlan,
    pub imputer: FittedImputer,
    pub clip_bounds: Option<ClipBounds>,
    pub encoder: FittedEncoder,
}

impl Preprocessor {
    pub fn fit(records: &[AuditRecord], plan: &PrepPlan) -> Result<Self> {
        plan.encoding.validate()?;
        if let Some(w) = &plan.window {
            w.validate()?;
        }
        let imputer = FittedImputer::fit(records, plan.impute)?;
        let (imputed, _) = imputer.apply(records);
        let clip_bounds = match &plan.clip {
            Some(rule) => Some(ClipBounds::fit(&imputed, rule)?),
            None => None,
        };
        let clipped = match &clip_bounds {
            Some(b) => b.apply(&imputed).0,
            None => imputed,
        };
        let encoder = FittedEncoder::fit(&clipped, &plan.encoding)?;
        Ok(Self {
            plan: plan.clone(),
            imputer,
            clip_bounds,
            encoder,
        })
    }

    /// Cleaned records (imputed and clipped) with the step report.
    pub fn clean(&self, records: &[AuditRecord]) -> (Vec<AuditRecord>, PrepReport) {
        let (imputed, ir) = self.imputer.apply(records);
        let mut report = PrepReport {
            imputed: ir.fields,
            ..Default::default()
        };
        let cleaned = match &self.clip_bounds {
            Some(b) => {
                let (out, counts) = b.apply(&imputed);
                report.clipped = b
                    .bounds
                    .iter()
                    .zip(counts)
                    .map(|(&(f, lo, hi), (_, n))| (f, lo, hi, n))
                    .collect();
                out
            }
            None => imputed,
        };
        (cleaned, report)
    }

    pub fn transform(&self, records: &[AuditRecord], labels: &[u8]) -> Result<Prepared> {
        let (cleaned, mut report) = self.clean(records);
        let mut table = self.encoder.transform(&cleaned)?;
        if let Some(spec) = &self.plan.derive {
            let derived = derive_features(&cleaned, spec)?;
            let names: Vec<&str> = derived.names.iter().map(String::as_str).collect();
            table.insert_columns(&names, &derived.columns);
            report.warnings.extend(derived.warnings);
        }
        let dataset = table.into_dataset(labels.to_vec())?;
        match &self.plan.window {
            Some(spec) => {
                let out = windowize(&cleaned, &dataset, spec)?;
                report.warnings.extend(out.warnings);
                Ok(Prepared {
                    dataset: out.dataset,
                    years: out.years,
                    report,
                })
            }
            None => Ok(Prepared {
                dataset,
                years: cleaned.iter().map(|r| r.year).collect(),
                report,
            }),
        }
    }

    /// Transform for scoring: labels are unknown and set to 0.
    pub fn transform_unlabeled(&self, records: &[AuditRecord]) -> Result<Prepared> {
        self.transform(records, &vec![0; records.len()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::{Firm, Industry};

    fn rec(year: i32, firm: Firm, workload: Option<f64>) -> AuditRecord {
        AuditRecord {
            year,
            firm_name: firm,
            total_audit_engagements: Some(100 + year as u32 % 7),
            high_risk_cases: Some(10),
            compliance_violations: Some(3),
            fraud_cases_detected: Some(2),
            industry_affected: Some(Industry::Tech),
            total_revenue_impact: Some(4.5),
            ai_used_for_auditing: Some(year % 2 == 0),
            employee_workload: workload,
            market_value: Some(100.0),
            region: Some("EMEA".into()),
            financial_status: Some("Stable".into()),
        }
    }

    #[test]
    fn default_pipeline_produces_named_columns() {
        let recs: Vec<_> = (2020..=2025)
            .map(|y| rec(y, Firm::EY, if y == 2022 { None } else { Some(40.0 + y as f64 - 2020.0) }))
            .collect();
        let labels = vec![0, 1, 0, 1, 0, 1];
        let pre = Preprocessor::fit(&recs, &PrepPlan::default()).unwrap();
        let out = pre.transform(&recs, &labels).unwrap();
        let names = out.dataset.feature_names();
        assert_eq!(names.len(), 11);
        assert_eq!(names[0], "year");
        assert!(names.contains(&"historical_violation_ratio".to_string()));
        assert!(names.contains(&"fraud_rate".to_string()));
        assert!(!names.iter().any(|n| n.starts_with("high_risk_cases")));
        let wl = out.report.imputed.iter().find(|f| f.0 == Field::EmployeeWorkload).unwrap();
        assert_eq!(wl.2, 1);
    }

    #[test]
    fn windowed_pipeline() {
        let recs: Vec<_> = (2020..=2025).map(|y| rec(y, Firm::EY, Some(45.0))).collect();
        let plan = PrepPlan {
            window: Some(WindowSpec::default()),
            ..Default::default()
        };
        let pre = Preprocessor::fit(&recs, &plan).unwrap();
        let out = pre.transform(&recs, &[0, 1, 0, 1, 0, 1]).unwrap();
        assert_eq!(out.dataset.n_rows(), 4);
        assert_eq!(out.years, vec![2022, 2023, 2024, 2025]);
        assert_eq!(out.dataset.n_features(), 11 * 5);
    }
}
