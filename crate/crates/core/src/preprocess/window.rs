//! Sliding-window restructuring of per-group yearly rows into samples
//! carrying lagged values and year-over-year deltas.

use std::collections::BTreeMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::{ColumnKind, Dataset};
use crate::error::{Error, Result};
use crate::record::{AuditRecord, Field};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub length: usize,
    pub stride: usize,
    pub group_by: Field,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            length: 3,
            stride: 1,
            group_by: Field::FirmName,
        }
    }
}

impl WindowSpec {
    pub fn validate(&self) -> Result<()> {
        if self.length < 2 {
            return Err(Error::Parameter(format!("window length must be >= 2, got {}", self.length)));
        }
        if self.stride < 1 {
            return Err(Error::Parameter("window stride must be >= 1".into()));
        }
        Ok(())
    }
}

/// Number of windows over a run of `run_len` consecutive years.
pub fn window_count(run_len: usize, length: usize, stride: usize) -> usize {
    if run_len < length {
        0
    } else {
        (run_len - length) / stride + 1
    }
}

#[derive(Debug, Clone)]
pub struct WindowOutput {
    pub dataset: Dataset,
    /// Year of the current (last) row of each sample.
    pub years: Vec<i32>,
    pub warnings: Vec<String>,
}

/// Builds one sample per window position per run of consecutive years.
///
/// `records` and `dataset` rows must align. Each sample carries the
/// current row's features, then for each lag `l` in `1..length` the
/// numeric features of year `t - l` followed by the deltas
/// `x(t - l + 1) - x(t - l)`. Gaps in a group's years split it into
/// separate runs; a repeated (group, year) is an error.
pub fn windowize(records: &[AuditRecord], dataset: &Dataset, spec: &WindowSpec) -> Result<WindowOutput> {
    spec.validate()?;
    if records.len() != dataset.n_rows() {
        return Err(Error::Window(format!(
            "{} records but {} dataset rows",
            records.len(),
            dataset.n_rows()
        )));
    }
    let mut groups: BTreeMap<String, Vec<(i32, usize)>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        groups
            .entry(r.category(spec.group_by).unwrap_or_default())
            .or_default()
            .push((r.year, i));
    }

    let mut warnings = Vec::new();
    let mut windows: Vec<Vec<usize>> = Vec::new();
    for (key, mut rows) in groups {
        rows.sort();
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Window(format!(
                "group {key} has more than one row for year {}",
                w[0].0
            )));
        }
        let mut runs: Vec<Vec<usize>> = vec![];
        let mut last_year = None;
        for &(year, i) in &rows {
            match last_year {
                Some(y) if year == y + 1 => runs.last_mut().unwrap().push(i),
                Some(y) => {
                    warnings.push(format!("group {key}: gap between {y} and {year}, run split"));
                    runs.push(vec![i]);
                }
                None => runs.push(vec![i]),
            }
            last_year = Some(year);
        }
        for run in runs {
            let count = window_count(run.len(), spec.length, spec.stride);
            if count == 0 {
                warnings.push(format!(
                    "group {key}: run of {} years shorter than window {}, no samples",
                    run.len(),
                    spec.length
                ));
            }
            for k in 0..count {
                let start = k * spec.stride;
                windows.push(run[start..start + spec.length].to_vec());
            }
        }
    }
    if windows.is_empty() {
        return Err(Error::Window("no group has a run as long as the window".into()));
    }

    let numeric: Vec<usize> = dataset
        .column_kinds()
        .iter()
        .enumerate()
        .filter(|(_, k)| k.is_numeric())
        .map(|(j, _)| j)
        .collect();
    let mut names = dataset.feature_names().to_vec();
    let mut kinds = dataset.column_kinds().to_vec();
    for lag in 1..spec.length {
        for &j in &numeric {
            names.push(format!("{}@lag{lag}", dataset.feature_names()[j]));
            kinds.push(ColumnKind::Derived);
        }
        for &j in &numeric {
            names.push(format!("{}@delta{lag}", dataset.feature_names()[j]));
            kinds.push(ColumnKind::Derived);
        }
    }

    let x = dataset.features();
    let p = dataset.n_features();
    let mut values = Array2::zeros((windows.len(), names.len()));
    let mut labels = Vec::with_capacity(windows.len());
    let mut keys = Vec::with_capacity(windows.len());
    let mut years = Vec::with_capacity(windows.len());
    for (s, w) in windows.iter().enumerate() {
        let cur = w[spec.length - 1];
        for j in 0..p {
            values[[s, j]] = x[[cur, j]];
        }
        let mut col = p;
        for lag in 1..spec.length {
            let older = w[spec.length - 1 - lag];
            let newer = w[spec.length - lag];
            for &j in &numeric {
                values[[s, col]] = x[[older, j]];
                col += 1;
            }
            for &j in &numeric {
                values[[s, col]] = x[[newer, j]] - x[[older, j]];
                col += 1;
            }
        }
        labels.push(dataset.labels()[cur]);
        keys.push(dataset.group_keys()[cur].clone());
        years.push(records[cur].year);
    }
    Ok(WindowOutput {
        dataset: Dataset::new(values, names, kinds, labels, keys)?,
        years,
        warnings,
    })
}
