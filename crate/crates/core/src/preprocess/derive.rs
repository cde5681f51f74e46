//! History-based features computed within each group from strictly prior
//! years only.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::{AuditRecord, Field};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeriveSpec {
    pub group_by: Field,
    /// Fields that get a year-over-year change column.
    pub trend_fields: Vec<Field>,
}

impl Default for DeriveSpec {
    fn default() -> Self {
        Self {
            group_by: Field::FirmName,
            trend_fields: vec![Field::TotalAuditEngagements],
        }
    }
}

pub fn trend_name(field: Field) -> String {
    match field {
        Field::TotalAuditEngagements => "audit_frequency_change".into(),
        f => format!("{}_change", f.key()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedFeatures {
    pub names: Vec<String>,
    /// One vector per name, aligned with the input records.
    pub columns: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

#[derive(Default, Clone)]
struct YearAggregate {
    violations: f64,
    engagements: f64,
    trend_sums: Vec<f64>,
    rows: usize,
}

/// Adds `historical_violation_ratio`, one change column per trend field
/// and `fraud_rate` to every record.
///
/// Rows sharing a (group, year) are aggregated: the violation ratio uses
/// summed violations over summed engagements of all strictly earlier
/// years in the group, and a change is measured against the mean of the
/// most recent earlier year.
pub fn derive_features(records: &[AuditRecord], spec: &DeriveSpec) -> Result<DerivedFeatures> {
    let need = |i: usize, f: Field| {
        records[i]
            .numeric(f)
            .ok_or_else(|| Error::Construction(format!("derive_features: missing {f} at row {}", i + 1)))
    };

    let mut groups: BTreeMap<String, BTreeMap<i32, YearAggregate>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        let key = r.category(spec.group_by).unwrap_or_default();
        let agg = groups
            .entry(key)
            .or_default()
            .entry(r.year)
            .or_insert_with(|| YearAggregate {
                trend_sums: vec![0.0; spec.trend_fields.len()],
                ..Default::default()
            });
        agg.violations += need(i, Field::ComplianceViolations)?;
        agg.engagements += need(i, Field::TotalAuditEngagements)?;
        for (k, &f) in spec.trend_fields.iter().enumerate() {
            agg.trend_sums[k] += need(i, f)?;
        }
        agg.rows += 1;
    }

    // Per (group, year): prior cumulative sums and previous-year means.
    struct History {
        ratio: f64,
        prev_means: Option<Vec<f64>>,
    }
    let mut warnings = Vec::new();
    let mut history: BTreeMap<(String, i32), History> = BTreeMap::new();
    for (key, years) in &groups {
        let (mut cum_v, mut cum_e) = (0.0, 0.0);
        let mut prev: Option<&YearAggregate> = None;
        for (&year, agg) in years {
            let ratio = if cum_e > 0.0 {
                cum_v / cum_e
            } else {
                if cum_v > 0.0 {
                    warnings.push(format!(
                        "{key}/{year}: prior violations with zero prior engagements, ratio set to 0"
                    ));
                }
                0.0
            };
            let prev_means = prev.map(|p| p.trend_sums.iter().map(|s| s / p.rows as f64).collect());
            history.insert((key.clone(), year), History { ratio, prev_means });
            cum_v += agg.violations;
            cum_e += agg.engagements;
            prev = Some(agg);
        }
    }

    let mut names = vec!["historical_violation_ratio".to_string()];
    names.extend(spec.trend_fields.iter().map(|&f| trend_name(f)));
    names.push("fraud_rate".into());
    let mut columns = vec![Vec::with_capacity(records.len()); names.len()];
    for (i, r) in records.iter().enumerate() {
        let key = r.category(spec.group_by).unwrap_or_default();
        let h = &history[&(key, r.year)];
        columns[0].push(h.ratio);
        for (k, &f) in spec.trend_fields.iter().enumerate() {
            let change = match &h.prev_means {
                Some(means) => need(i, f)? - means[k],
                None => 0.0,
            };
            columns[1 + k].push(change);
        }
        let engagements = need(i, Field::TotalAuditEngagements)?;
        let fraud = need(i, Field::FraudCasesDetected)?;
        let rate = if engagements > 0.0 {
            fraud / engagements
        } else {
            warnings.push(format!("row {}: zero engagements, fraud_rate set to 0", i + 1));
            0.0
        };
        columns[names.len() - 1].push(rate);
    }
    Ok(DerivedFeatures {
        names,
        columns,
        warnings,
    })
}
