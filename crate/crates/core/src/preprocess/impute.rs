use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::quantile::median;
use crate::record::{AuditRecord, Field, FieldKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ImputePolicy {
    /// Median for counts and reals (rounded for counts), mode for
    /// categoricals and booleans.
    #[default]
    MedianNumericModeCategorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FillValue {
    Number(f64),
    Category(String),
}

impl std::fmt::Display for FillValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FillValue::Number(v) => write!(f, "{v}"),
            FillValue::Category(c) => f.write_str(c),
        }
    }
}

/// Fill values learned from a record set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedImputer {
    pub policy: ImputePolicy,
    pub fills: Vec<(Field, FillValue)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImputeReport {
    /// Per field: fill value and how many cells were filled.
    pub fields: Vec<(Field, FillValue, usize)>,
}

/// Fields that may be missing in a record.
fn imputable_fields() -> impl Iterator<Item = Field> {
    Field::ALL
        .into_iter()
        .filter(|f| !matches!(f, Field::Year | Field::FirmName))
}

impl FittedImputer {
    pub fn fit(records: &[AuditRecord], policy: ImputePolicy) -> Result<Self> {
        let mut fills = Vec::new();
        for field in imputable_fields() {
            let fill = match field.kind() {
                FieldKind::Count | FieldKind::Real => {
                    let observed: Vec<f64> = records.iter().filter_map(|r| r.numeric(field)).collect();
                    if observed.is_empty() {
                        return Err(Error::Imputation(field.key().into()));
                    }
                    let m = median(&observed);
                    FillValue::Number(if field.kind() == FieldKind::Count { m.round() } else { m })
                }
                _ => {
                    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
                    for c in records.iter().filter_map(|r| r.category(field)) {
                        *counts.entry(c).or_default() += 1;
                    }
                    // BTreeMap iterates in lexicographic order, so the first
                    // maximum is the smallest tied category.
                    let mode = counts
                        .iter()
                        .fold(None::<(&String, usize)>, |best, (k, &n)| match best {
                            Some((_, bn)) if bn >= n => best,
                            _ => Some((k, n)),
                        })
                        .ok_or_else(|| Error::Imputation(field.key().into()))?;
                    FillValue::Category(mode.0.clone())
                }
            };
            fills.push((field, fill));
        }
        Ok(Self { policy, fills })
    }

    pub fn apply(&self, records: &[AuditRecord]) -> (Vec<AuditRecord>, ImputeReport) {
        let mut out = records.to_vec();
        let mut fields = Vec::new();
        for (field, fill) in &self.fills {
            let mut filled = 0;
            for r in out.iter_mut().filter(|r| r.is_missing(*field)) {
                match fill {
                    FillValue::Number(v) => r.set_measure(*field, Some(*v)),
                    FillValue::Category(c) => r
                        .set_category(*field, c)
                        .expect("fill value was observed for this field"),
                }
                filled += 1;
            }
            fields.push((*field, fill.clone(), filled));
        }
        (out, ImputeReport { fields })
    }
}

/// Fits fill statistics on `records` and fills every missing cell.
pub fn impute(
    records: &[AuditRecord],
    policy: ImputePolicy,
) -> Result<(Vec<AuditRecord>, FittedImputer, ImputeReport)> {
    let imputer = FittedImputer::fit(records, policy)?;
    let (out, report) = imputer.apply(records);
    Ok((out, imputer, report))
}
