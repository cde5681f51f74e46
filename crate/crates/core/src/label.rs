//! Binary high-risk label derived from the risk percentage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::AuditRecord;

pub const DEFAULT_THRESHOLD: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSpec {
    /// Risk-percentage cutoff; a record is positive when its share of
    /// high-risk cases is at or above it.
    pub threshold: f64,
    pub positive_class_name: String,
}

impl Default for LabelSpec {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            positive_class_name: "high_risk".into(),
        }
    }
}

impl LabelSpec {
    pub fn new(threshold: f64) -> Result<Self> {
        let spec = Self {
            threshold,
            ..Self::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Parameter(format!(
                "label threshold must lie in (0, 1), got {}",
                self.threshold
            )));
        }
        Ok(())
    }

    pub fn label_of(&self, risk_percentage: f64) -> u8 {
        u8::from(risk_percentage >= self.threshold)
    }
}

/// Labels each record; rows are reported 1-based in errors.
pub fn derive_labels(records: &[AuditRecord], spec: &LabelSpec) -> Result<Vec<u8>> {
    spec.validate()?;
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let total = match r.total_audit_engagements {
                None => {
                    return Err(Error::Labeling {
                        row: i + 1,
                        detail: "total_audit_engagements is missing".into(),
                    })
                }
                Some(0) => {
                    return Err(Error::Labeling {
                        row: i + 1,
                        detail: "total_audit_engagements is zero".into(),
                    })
                }
                Some(t) => t,
            };
            let high = r.high_risk_cases.ok_or_else(|| Error::Labeling {
                row: i + 1,
                detail: "high_risk_cases is missing".into(),
            })?;
            Ok(spec.label_of(high as f64 / total as f64))
        })
        .collect()
}
