//! Firm-year audit records and their CSV representation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const YEAR_MIN: i32 = 2020;
pub const YEAR_MAX: i32 = 2025;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Firm {
    EY,
    PwC,
    Deloitte,
    KPMG,
}

impl Firm {
    pub const ALL: [Firm; 4] = [Firm::EY, Firm::PwC, Firm::Deloitte, Firm::KPMG];

    pub fn as_str(self) -> &'static str {
        match self {
            Firm::EY => "EY",
            Firm::PwC => "PwC",
            Firm::Deloitte => "Deloitte",
            Firm::KPMG => "KPMG",
        }
    }
}

impl fmt::Display for Firm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Firm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ey" | "ernst & young" | "ernst and young" => Ok(Firm::EY),
            "pwc" => Ok(Firm::PwC),
            "deloitte" => Ok(Firm::Deloitte),
            "kpmg" => Ok(Firm::KPMG),
            _ => Err(format!("unknown firm {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Industry {
    Finance,
    Tech,
    Retail,
    Healthcare,
}

impl Industry {
    pub const ALL: [Industry; 4] = [
        Industry::Finance,
        Industry::Tech,
        Industry::Retail,
        Industry::Healthcare,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Industry::Finance => "Finance",
            Industry::Tech => "Tech",
            Industry::Retail => "Retail",
            Industry::Healthcare => "Healthcare",
        }
    }
}

impl fmt::Display for Industry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Industry {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "finance" => Ok(Industry::Finance),
            "tech" => Ok(Industry::Tech),
            "retail" => Ok(Industry::Retail),
            "healthcare" => Ok(Industry::Healthcare),
            _ => Err(format!("unknown industry {s:?}")),
        }
    }
}

/// Column of the record schema, in canonical CSV order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Field {
    Year,
    FirmName,
    TotalAuditEngagements,
    HighRiskCases,
    ComplianceViolations,
    FraudCasesDetected,
    IndustryAffected,
    TotalRevenueImpact,
    AiUsedForAuditing,
    EmployeeWorkload,
    MarketValue,
    Region,
    FinancialStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Year,
    Count,
    Real,
    Boolean,
    Categorical,
}

impl Field {
    pub const ALL: [Field; 13] = [
        Field::Year,
        Field::FirmName,
        Field::TotalAuditEngagements,
        Field::HighRiskCases,
        Field::ComplianceViolations,
        Field::FraudCasesDetected,
        Field::IndustryAffected,
        Field::TotalRevenueImpact,
        Field::AiUsedForAuditing,
        Field::EmployeeWorkload,
        Field::MarketValue,
        Field::Region,
        Field::FinancialStatus,
    ];

    /// CSV header spelling.
    pub fn header(self) -> &'static str {
        match self {
            Field::Year => "Year",
            Field::FirmName => "Firm_Name",
            Field::TotalAuditEngagements => "Total_Audit_Engagements",
            Field::HighRiskCases => "High_Risk_Cases",
            Field::ComplianceViolations => "Compliance_Violations",
            Field::FraudCasesDetected => "Fraud_Cases_Detected",
            Field::IndustryAffected => "Industry_Affected",
            Field::TotalRevenueImpact => "Total_Revenue_Impact",
            Field::AiUsedForAuditing => "AI_Used_for_Auditing",
            Field::EmployeeWorkload => "Employee_Workload",
            Field::MarketValue => "Market_Value",
            Field::Region => "Region",
            Field::FinancialStatus => "Financial_Status",
        }
    }

    /// Lower-case identifier used in feature names and config keys.
    pub fn key(self) -> &'static str {
        match self {
            Field::Year => "year",
            Field::FirmName => "firm_name",
            Field::TotalAuditEngagements => "total_audit_engagements",
            Field::HighRiskCases => "high_risk_cases",
            Field::ComplianceViolations => "compliance_violations",
            Field::FraudCasesDetected => "fraud_cases_detected",
            Field::IndustryAffected => "industry_affected",
            Field::TotalRevenueImpact => "total_revenue_impact",
            Field::AiUsedForAuditing => "ai_used_for_auditing",
            Field::EmployeeWorkload => "employee_workload",
            Field::MarketValue => "market_value",
            Field::Region => "region",
            Field::FinancialStatus => "financial_status",
        }
    }

    pub fn kind(self) -> FieldKind {
        match self {
            Field::Year => FieldKind::Year,
            Field::TotalAuditEngagements
            | Field::HighRiskCases
            | Field::ComplianceViolations
            | Field::FraudCasesDetected => FieldKind::Count,
            Field::TotalRevenueImpact | Field::EmployeeWorkload | Field::MarketValue => {
                FieldKind::Real
            }
            Field::AiUsedForAuditing => FieldKind::Boolean,
            Field::FirmName | Field::IndustryAffected | Field::Region | Field::FinancialStatus => {
                FieldKind::Categorical
            }
        }
    }

    pub fn is_categorical(self) -> bool {
        self.kind() == FieldKind::Categorical
    }

    /// Count and real-valued fields, the ones imputation and clipping act on.
    pub fn is_measure(self) -> bool {
        matches!(self.kind(), FieldKind::Count | FieldKind::Real)
    }

    /// Categorical field with an open vocabulary (unseen values possible).
    pub fn is_open_vocabulary(self) -> bool {
        matches!(self, Field::Region | Field::FinancialStatus)
    }

    pub fn from_key(s: &str) -> Option<Field> {
        let norm = normalize_header(s);
        Field::ALL.into_iter().find(|f| f.key() == norm)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

fn normalize_header(s: &str) -> String {
    s.trim()
        .chars()
        .map(|c| if c.is_whitespace() { '_' } else { c.to_ascii_lowercase() })
        .collect()
}

/// One firm-year row. Measures, booleans and the open categoricals may be
/// missing (`None`); year and firm identify the row and are required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub year: i32,
    pub firm_name: Firm,
    pub total_audit_engagements: Option<u32>,
    pub high_risk_cases: Option<u32>,
    pub compliance_violations: Option<u32>,
    pub fraud_cases_detected: Option<u32>,
    pub industry_affected: Option<Industry>,
    pub total_revenue_impact: Option<f64>,
    pub ai_used_for_auditing: Option<bool>,
    pub employee_workload: Option<f64>,
    pub market_value: Option<f64>,
    pub region: Option<String>,
    pub financial_status: Option<String>,
}

impl AuditRecord {
    /// Value of a count, real, year or boolean field as `f64`.
    pub fn numeric(&self, field: Field) -> Option<f64> {
        match field {
            Field::Year => Some(self.year as f64),
            Field::TotalAuditEngagements => self.total_audit_engagements.map(f64::from),
            Field::HighRiskCases => self.high_risk_cases.map(f64::from),
            Field::ComplianceViolations => self.compliance_violations.map(f64::from),
            Field::FraudCasesDetected => self.fraud_cases_detected.map(f64::from),
            Field::TotalRevenueImpact => self.total_revenue_impact,
            Field::EmployeeWorkload => self.employee_workload,
            Field::MarketValue => self.market_value,
            Field::AiUsedForAuditing => self.ai_used_for_auditing.map(|b| if b { 1.0 } else { 0.0 }),
            Field::FirmName | Field::IndustryAffected | Field::Region | Field::FinancialStatus => {
                None
            }
        }
    }

    /// Sets a measure field. Count fields are rounded to the nearest integer.
    pub fn set_measure(&mut self, field: Field, value: Option<f64>) {
        let count = |v: Option<f64>| v.map(|x| x.round().max(0.0) as u32);
        match field {
            Field::TotalAuditEngagements => self.total_audit_engagements = count(value),
            Field::HighRiskCases => self.high_risk_cases = count(value),
            Field::ComplianceViolations => self.compliance_violations = count(value),
            Field::FraudCasesDetected => self.fraud_cases_detected = count(value),
            Field::TotalRevenueImpact => self.total_revenue_impact = value,
            Field::EmployeeWorkload => self.employee_workload = value,
            Field::MarketValue => self.market_value = value,
            other => panic!("{other} is not a measure field"),
        }
    }

    /// Value of a categorical (or boolean) field as a string.
    pub fn category(&self, field: Field) -> Option<String> {
        match field {
            Field::FirmName => Some(self.firm_name.to_string()),
            Field::IndustryAffected => self.industry_affected.map(|i| i.to_string()),
            Field::Region => self.region.clone(),
            Field::FinancialStatus => self.financial_status.clone(),
            Field::AiUsedForAuditing => self.ai_used_for_auditing.map(|b| bool_str(b).to_string()),
            Field::Year => Some(self.year.to_string()),
            _ => None,
        }
    }

    /// Sets a categorical or boolean field from its string form.
    pub fn set_category(&mut self, field: Field, value: &str) -> std::result::Result<(), String> {
        match field {
            Field::IndustryAffected => self.industry_affected = Some(value.parse()?),
            Field::Region => self.region = Some(value.to_string()),
            Field::FinancialStatus => self.financial_status = Some(value.to_string()),
            Field::AiUsedForAuditing => self.ai_used_for_auditing = Some(parse_bool(value)?),
            Field::FirmName => self.firm_name = value.parse()?,
            other => return Err(format!("{other} is not categorical")),
        }
        Ok(())
    }

    pub fn is_missing(&self, field: Field) -> bool {
        match field.kind() {
            FieldKind::Categorical => self.category(field).is_none(),
            _ => self.numeric(field).is_none(),
        }
    }

    /// High-risk share of engagements, when both counts are present and
    /// engagements are positive.
    pub fn risk_percentage(&self) -> Option<f64> {
        match (self.high_risk_cases, self.total_audit_engagements) {
            (Some(h), Some(t)) if t > 0 => Some(h as f64 / t as f64),
            _ => None,
        }
    }

    pub fn check_invariants(&self, row: usize) -> Result<()> {
        if !(YEAR_MIN..=YEAR_MAX).contains(&self.year) {
            return Err(Error::Data {
                row,
                column: Field::Year.header().into(),
                value: self.year.to_string(),
                reason: format!("year outside {YEAR_MIN}-{YEAR_MAX}"),
            });
        }
        if let (Some(h), Some(t)) = (self.high_risk_cases, self.total_audit_engagements) {
            if h > t {
                return Err(Error::Consistency {
                    row,
                    detail: format!("high_risk_cases ({h}) exceeds total_audit_engagements ({t})"),
                });
            }
        }
        Ok(())
    }
}

fn bool_str(b: bool) -> &'static str {
    if b {
        "Yes"
    } else {
        "No"
    }
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "yes" => Ok(true),
        "no" => Ok(false),
        _ => Err(format!("expected Yes or No, got {s:?}")),
    }
}

/// Parses CSV text with the canonical header (any column order, header
/// matching is case-insensitive with spaces read as underscores).
///
/// Row numbers in errors are 1-based data rows (the header is row 0).
pub fn parse_records(csv_text: &str) -> Result<Vec<AuditRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());

    let headers = reader.headers().map_err(|e| Error::Schema {
        missing: vec![format!("unreadable header: {e}")],
        extra: vec![],
    })?;
    let mut positions = [usize::MAX; 13];
    let mut extra = Vec::new();
    for (i, h) in headers.iter().enumerate() {
        match Field::from_key(h) {
            Some(f) if positions[f as usize] == usize::MAX => positions[f as usize] = i,
            _ => extra.push(h.to_string()),
        }
    }
    let missing: Vec<String> = Field::ALL
        .iter()
        .filter(|f| positions[**f as usize] == usize::MAX)
        .map(|f| f.header().to_string())
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(Error::Schema { missing, extra });
    }

    let mut records = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let row_no = idx + 1;
        let row = row.map_err(|e| Error::Data {
            row: row_no,
            column: "*".into(),
            value: String::new(),
            reason: e.to_string(),
        })?;
        let cell = |f: Field| row.get(positions[f as usize]).unwrap_or("");
        let rec = parse_row(row_no, &cell)?;
        rec.check_invariants(row_no)?;
        records.push(rec);
    }
    Ok(records)
}

fn parse_row<'a>(row: usize, cell: &dyn Fn(Field) -> &'a str) -> Result<AuditRecord> {
    fn data_err(row: usize, f: Field, v: &str, reason: impl Into<String>) -> Error {
        Error::Data {
            row,
            column: f.header().into(),
            value: v.into(),
            reason: reason.into(),
        }
    }
    let required = |f: Field| -> Result<&str> {
        let v = cell(f);
        if v.is_empty() {
            Err(data_err(row, f, v, "required field is empty"))
        } else {
            Ok(v)
        }
    };
    let count = |f: Field| -> Result<Option<u32>> {
        let v = cell(f);
        if v.is_empty() {
            return Ok(None);
        }
        v.parse::<u32>()
            .map(Some)
            .map_err(|_| data_err(row, f, v, "expected a non-negative integer"))
    };
    let real = |f: Field, strictly_positive: bool| -> Result<Option<f64>> {
        let v = cell(f);
        if v.is_empty() {
            return Ok(None);
        }
        let x: f64 = v
            .parse()
            .map_err(|_| data_err(row, f, v, "expected a real number"))?;
        if !x.is_finite() || x < 0.0 || (strictly_positive && x == 0.0) {
            return Err(data_err(row, f, v, "value out of range"));
        }
        Ok(Some(x))
    };
    let text = |f: Field| -> Option<String> {
        let v = cell(f);
        (!v.is_empty()).then(|| v.to_string())
    };

    let year_s = required(Field::Year)?;
    let year = year_s
        .parse::<i32>()
        .map_err(|_| data_err(row, Field::Year, year_s, "expected an integer year"))?;
    let firm_s = required(Field::FirmName)?;
    let firm_name = firm_s
        .parse::<Firm>()
        .map_err(|e| data_err(row, Field::FirmName, firm_s, e))?;
    let industry_affected = match text(Field::IndustryAffected) {
        None => None,
        Some(s) => Some(
            s.parse::<Industry>()
                .map_err(|e| data_err(row, Field::IndustryAffected, &s, e))?,
        ),
    };
    let ai_used_for_auditing = match text(Field::AiUsedForAuditing) {
        None => None,
        Some(s) => Some(parse_bool(&s).map_err(|e| data_err(row, Field::AiUsedForAuditing, &s, e))?),
    };

    Ok(AuditRecord {
        year,
        firm_name,
        total_audit_engagements: count(Field::TotalAuditEngagements)?,
        high_risk_cases: count(Field::HighRiskCases)?,
        compliance_violations: count(Field::ComplianceViolations)?,
        fraud_cases_detected: count(Field::FraudCasesDetected)?,
        industry_affected,
        total_revenue_impact: real(Field::TotalRevenueImpact, false)?,
        ai_used_for_auditing,
        employee_workload: real(Field::EmployeeWorkload, true)?,
        market_value: real(Field::MarketValue, false)?,
        region: text(Field::Region),
        financial_status: text(Field::FinancialStatus),
    })
}

/// Writes records as CSV with the canonical header; missing values are
/// empty cells. Reals use the shortest representation that parses back
/// to the same value.
pub fn write_records(records: &[AuditRecord]) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(Field::ALL.iter().map(|f| f.header()))
        .expect("in-memory write");
    for r in records {
        let opt = |v: Option<String>| v.unwrap_or_default();
        let row = [
            r.year.to_string(),
            r.firm_name.to_string(),
            opt(r.total_audit_engagements.map(|v| v.to_string())),
            opt(r.high_risk_cases.map(|v| v.to_string())),
            opt(r.compliance_violations.map(|v| v.to_string())),
            opt(r.fraud_cases_detected.map(|v| v.to_string())),
            opt(r.industry_affected.map(|v| v.to_string())),
            opt(r.total_revenue_impact.map(|v| v.to_string())),
            opt(r.ai_used_for_auditing.map(|b| bool_str(b).to_string())),
            opt(r.employee_workload.map(|v| v.to_string())),
            opt(r.market_value.map(|v| v.to_string())),
            opt(r.region.clone()),
            opt(r.financial_status.clone()),
        ];
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}
