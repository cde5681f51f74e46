use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::quantile::quantile_sorted;
use crate::record::{AuditRecord, Field, FieldKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipRule {
    pub q_low: f64,
    pub q_high: f64,
    /// Measure fields to clip.
    pub fields: Vec<Field>,
}

impl Default for ClipRule {
    fn default() -> Self {
        Self {
            q_low: 0.01,
            q_high: 0.99,
            fields: Field::ALL.into_iter().filter(|f| f.is_measure()).collect(),
        }
    }
}

impl ClipRule {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.q_low && self.q_low < self.q_high && self.q_high <= 1.0) {
            return Err(Error::Parameter(format!(
                "clip quantiles must satisfy 0 <= q_low < q_high <= 1, got ({}, {})",
                self.q_low, self.q_high
            )));
        }
        if let Some(f) = self.fields.iter().find(|f| !f.is_measure()) {
            return Err(Error::Parameter(format!("cannot clip non-numeric field {f}")));
        }
        Ok(())
    }
}

/// Per-field bounds learned from data. Fields whose bounds collapse (a
/// constant column) are absent and left untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipBounds {
    pub bounds: Vec<(Field, f64, f64)>,
}

impl ClipBounds {
    pub fn fit(records: &[AuditRecord], rule: &ClipRule) -> Result<Self> {
        rule.validate()?;
        let mut bounds = Vec::new();
        for &field in &rule.fields {
            let mut values: Vec<f64> = records.iter().filter_map(|r| r.numeric(field)).collect();
            if values.is_empty() {
                continue;
            }
            values.sort_by(f64::total_cmp);
            if values[0] == values[values.len() - 1] {
                continue;
            }
            let mut lo = quantile_sorted(&values, rule.q_low);
            let mut hi = quantile_sorted(&values, rule.q_high);
            if field.kind() == FieldKind::Count {
                // Round inward so clipped counts stay integral and inside the quantiles.
                lo = lo.ceil();
                hi = hi.floor();
                if lo > hi {
                    continue;
                }
            }
            bounds.push((field, lo, hi));
        }
        Ok(Self { bounds })
    }

    /// Clamps values into the bounds; returns clipped records and the number
    /// of clipped cells per bounded field.
    pub fn apply(&self, records: &[AuditRecord]) -> (Vec<AuditRecord>, Vec<(Field, usize)>) {
        let mut out = records.to_vec();
        let mut counts = Vec::new();
        for &(field, lo, hi) in &self.bounds {
            let mut n = 0;
            for r in out.iter_mut() {
                if let Some(v) = r.numeric(field) {
                    let c = v.clamp(lo, hi);
                    if c != v {
                        r.set_measure(field, Some(c));
                        n += 1;
                    }
                }
            }
            counts.push((field, n));
        }
        (out, counts)
    }
}

/// Clips every rule field to its empirical `[q_low, q_high]` quantiles.
pub fn clip_outliers(
    records: &[AuditRecord],
    rule: &ClipRule,
) -> Result<(Vec<AuditRecord>, ClipBounds, Vec<(Field, usize)>)> {
    let bounds = ClipBounds::fit(records, rule)?;
    let (out, counts) = bounds.apply(records);
    Ok((out, bounds, counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::Firm;

    fn with_workload(v: f64) -> AuditRecord {
        AuditRecord {
            year: 2020,
            firm_name: Firm::EY,
            total_audit_engagements: Some(v as u32),
            high_risk_cases: Some(0),
            compliance_violations: Some(7),
            fraud_cases_detected: None,
            industry_affected: None,
            total_revenue_impact: None,
            ai_used_for_auditing: None,
            employee_workload: Some(v),
            market_value: None,
            region: None,
            financial_status: None,
        }
    }

    fn rule(fields: Vec<Field>, lo: f64, hi: f64) -> ClipRule {
        ClipRule { q_low: lo, q_high: hi, fields }
    }

    #[test]
    fn clips_tails_only() {
        let recs: Vec<_> = (1..=100).map(|v| with_workload(v as f64)).collect();
        let (out, bounds, counts) =
            clip_outliers(&recs, &rule(vec![Field::EmployeeWorkload, Field::TotalAuditEngagements], 0.01, 0.99)).unwrap();
        // Oracle: sorted 1..100, linear interpolation at 0.99 and 98.01.
        assert_eq!(bounds.bounds[0], (Field::EmployeeWorkload, 1.99, 99.01));
        assert_eq!(out[0].employee_workload, Some(1.99));
        assert_eq!(out[99].employee_workload, Some(99.01));
        for i in 1..99 {
            assert_eq!(out[i].employee_workload, recs[i].employee_workload);
        }
        // count bounds round inward: [2, 99]
        assert_eq!(out[0].total_audit_engagements, Some(2));
        assert_eq!(out[99].total_audit_engagements, Some(99));
        assert_eq!(counts, vec![(Field::EmployeeWorkload, 2), (Field::TotalAuditEngagements, 2)]);
    }

    #[test]
    fn full_range_is_identity() {
        let recs: Vec<_> = (1..=20).map(|v| with_workload(v as f64)).collect();
        let (out, _, counts) = clip_outliers(&recs, &rule(vec![Field::EmployeeWorkload], 0.0, 1.0)).unwrap();
        assert_eq!(out, recs);
        assert!(counts.iter().all(|c| c.1 == 0));
    }

    #[test]
    fn constant_field_untouched() {
        let recs: Vec<_> = (1..=20).map(|v| with_workload(v as f64)).collect();
        let (out, bounds, counts) =
            clip_outliers(&recs, &rule(vec![Field::ComplianceViolations], 0.1, 0.9)).unwrap();
        assert_eq!(out, recs);
        assert!(bounds.bounds.is_empty());
        assert!(counts.is_empty());
    }

    #[test]
    fn invalid_rule_rejected() {
        assert!(clip_outliers(&[], &rule(vec![], 0.5, 0.5)).is_err());
        assert!(clip_outliers(&[], &rule(vec![Field::Region], 0.1, 0.9)).is_err());
    }
}
