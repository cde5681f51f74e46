use serde::{Deserialize, Serialize};

use crate::record::{AuditRecord, Field};

/// Pearson coefficient over pairs where both values are present.
/// `None` with fewer than two pairs or a constant side.
pub fn pearson(a: &[Option<f64>], b: &[Option<f64>]) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = a
        .iter()
        .zip(b)
        .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
        .collect();
    let n = pairs.len();
    if n < 2 {
        return None;
    }
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrMatrix {
    pub names: Vec<String>,
    /// Symmetric; `None` marks an undefined coefficient.
    pub values: Vec<Vec<Option<f64>>>,
}

impl CorrMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        self.values[i][j]
    }
}

pub fn pearson_matrix(columns: &[(String, Vec<Option<f64>>)]) -> CorrMatrix {
    let p = columns.len();
    let mut values = vec![vec![None; p]; p];
    for i in 0..p {
        for j in i..p {
            let r = pearson(&columns[i].1, &columns[j].1).map(|r| if i == j { 1.0 } else { r });
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    CorrMatrix {
        names: columns.iter().map(|c| c.0.clone()).collect(),
        values,
    }
}

/// Name of the derived `high_risk_cases / total_audit_engagements` column.
pub const RISK_PERCENTAGE: &str = "risk_percentage";

/// Count and real columns of `records` (plus risk percentage when asked).
pub fn record_columns(records: &[AuditRecord], include_risk_percentage: bool) -> Vec<(String, Vec<Option<f64>>)> {
    let mut cols: Vec<(String, Vec<Option<f64>>)> = Field::ALL
        .into_iter()
        .filter(|f| f.is_measure())
        .map(|f| (f.key().to_string(), records.iter().map(|r| r.numeric(f)).collect()))
        .collect();
    if include_risk_percentage {
        cols.push((RISK_PERCENTAGE.into(), records.iter().map(|r| r.risk_percentage()).collect()));
    }
    cols
}

/// Correlation matrix of the record measures and risk percentage.
pub fn record_correlations(records: &[AuditRecord]) -> CorrMatrix {
    pearson_matrix(&record_columns(records, true))
}

/// Values of a measure or of risk percentage by column name.
pub fn record_column(records: &[AuditRecord], name: &str) -> Option<Vec<Option<f64>>> {
    if name == RISK_PERCENTAGE {
        return Some(records.iter().map(|r| r.risk_percentage()).collect());
    }
    let f = Field::from_key(name)?;
    Some(records.iter().map(|r| r.numeric(f)).collect())
}
