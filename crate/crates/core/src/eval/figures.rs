use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::record::{AuditRecord, Firm, Industry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmYearTotal {
    pub firm: Firm,
    pub year: i32,
    pub high_risk_cases: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmIndustryRevenue {
    pub firm: Firm,
    pub industry: Industry,
    pub total_revenue_impact: f64,
    /// Population standard deviation of the record values in the group.
    pub std: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureAggregates {
    pub high_risk_by_firm_year: Vec<FirmYearTotal>,
    pub revenue_by_firm_industry: Vec<FirmIndustryRevenue>,
}

/// Grouped totals; records missing the grouped value or key are skipped
/// and groups without any value are omitted.
pub fn figure_aggregates(records: &[AuditRecord]) -> FigureAggregates {
    let mut a: BTreeMap<(Firm, i32), u64> = BTreeMap::new();
    let mut b: BTreeMap<(Firm, Industry), Vec<f64>> = BTreeMap::new();
    for r in records {
        if let Some(h) = r.high_risk_cases {
            *a.entry((r.firm_name, r.year)).or_default() += h as u64;
        }
        if let (Some(ind), Some(v)) = (r.industry_affected, r.total_revenue_impact) {
            b.entry((r.firm_name, ind)).or_default().push(v);
        }
    }
    FigureAggregates {
        high_risk_by_firm_year: a
            .into_iter()
            .map(|((firm, year), high_risk_cases)| FirmYearTotal {
                firm,
                year,
                high_risk_cases,
            })
            .collect(),
        revenue_by_firm_industry: b
            .into_iter()
            .map(|((firm, industry), v)| {
                let n = v.len();
                let mean = v.iter().sum::<f64>() / n as f64;
                let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
                FirmIndustryRevenue {
                    firm,
                    industry,
                    total_revenue_impact: v.iter().sum(),
                    std: var.sqrt(),
                    n,
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(firm: Firm, year: i32, h: u32, ind: Industry, rev: f64) -> AuditRecord {
        AuditRecord {
            year,
            firm_name: firm,
            total_audit_engagements: Some(100),
            high_risk_cases: Some(h),
            compliance_violations: None,
            fraud_cases_detected: None,
            industry_affected: Some(ind),
            total_revenue_impact: Some(rev),
            ai_used_for_auditing: None,
            employee_workload: None,
            market_value: None,
            region: None,
            financial_status: None,
        }
    }

    #[test]
    fn sums_and_stddev() {
        let recs = vec![
            rec(Firm::PwC, 2022, 3, Industry::Tech, 2.0),
            rec(Firm::PwC, 2022, 5, Industry::Tech, 4.0),
            rec(Firm::EY, 2021, 1, Industry::Retail, 7.5),
        ];
        let agg = figure_aggregates(&recs);
        assert_eq!(agg.high_risk_by_firm_year.len(), 2);
        let pwc = agg.high_risk_by_firm_year.iter().find(|r| r.firm == Firm::PwC).unwrap();
        assert_eq!((pwc.year, pwc.high_risk_cases), (2022, 8));
        let tech = &agg.revenue_by_firm_industry[1];
        assert_eq!((tech.firm, tech.total_revenue_impact, tech.std), (Firm::PwC, 6.0, 1.0));
        let single = &agg.revenue_by_firm_industry[0];
        assert_eq!((single.n, single.std), (1, 0.0));
    }

    #[test]
    fn empty_groups_are_omitted() {
        let mut r = rec(Firm::KPMG, 2020, 1, Industry::Finance, 1.0);
        r.industry_affected = None;
        assert!(figure_aggregates(&[r]).revenue_by_firm_industry.is_empty());
    }
}
