use ndarray::{Array2, ArrayView1};
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::trees::gini::gini2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureSubset {
    /// floor(sqrt(p)), at least 1.
    Sqrt,
    All,
    Count(usize),
}

impl FeatureSubset {
    pub fn resolve(self, p: usize) -> usize {
        match self {
            FeatureSubset::Sqrt => ((p as f64).sqrt().floor() as usize).max(1),
            FeatureSubset::All => p,
            FeatureSubset::Count(m) => m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until the other stopping rules apply.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub features_per_split: FeatureSubset,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: Some(15),
            min_samples_split: 10,
            min_samples_leaf: 5,
            features_per_split: FeatureSubset::Sqrt,
        }
    }
}

impl TreeParams {
    /// Fully grown tree over all features.
    pub fn unbounded() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            features_per_split: FeatureSubset::All,
        }
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.max_depth == Some(0) {
            return Err(Error::Parameter("max_depth must be positive".into()));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::Parameter("min_samples_leaf must be >= 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::Parameter("min_samples_split must be >= 2".into()));
        }
        let m = self.features_per_split.resolve(n_features);
        if m == 0 || m > n_features {
            return Err(Error::Parameter(format!(
                "features_per_split resolves to {m}, must lie in 1..={n_features}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        counts: [u32; 2],
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        counts: [u32; 2],
    },
}

impl Node {
    pub fn counts(&self) -> [u32; 2] {
        match self {
            Node::Leaf { counts } | Node::Split { counts, .. } => *counts,
        }
    }

    pub fn n_samples(&self) -> u32 {
        let c = self.counts();
        c[0] + c[1]
    }

    pub fn impurity(&self) -> f64 {
        let c = self.counts();
        gini2(c[0] as f64, c[1] as f64)
    }
}

/// Tree stored as a node array with the root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    pub n_features: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// Parent impurity minus the size-weighted child impurity.
    pub gain: f64,
    pub weighted_impurity: f64,
}

/// Lowest size-weighted child Gini split over `candidates` (searched in
/// ascending order; ties keep the lower feature, then lower threshold).
///
/// Thresholds are midpoints between consecutive distinct sorted values and
/// rows with `x <= threshold` go left. Splits leaving fewer than
/// `min_samples_leaf` rows on a side are skipped.
pub fn best_split(
    x: &Array2<f64>,
    y: &[u8],
    rows: &[usize],
    candidates: &[usize],
    params: &TreeParams,
) -> Option<Split> {
    let columns: Vec<Vec<f64>> = (0..x.ncols()).map(|j| x.column(j).to_vec()).collect();
    best_split_columns(&columns, y, rows, candidates, params)
}

fn best_split_columns(
    columns: &[Vec<f64>],
    y: &[u8],
    rows: &[usize],
    candidates: &[usize],
    params: &TreeParams,
) -> Option<Split> {
    let n = rows.len();
    if n < params.min_samples_split {
        return None;
    }
    let ones = rows.iter().filter(|&&i| y[i] == 1).count();
    let (t0, t1) = ((n - ones) as f64, ones as f64);
    let parent = gini2(t0, t1);
    if parent == 0.0 {
        return None;
    }
    let mut sorted = features_sorted(candidates);
    sorted.dedup();
    let min_leaf = params.min_samples_leaf;
    let mut best: Option<Split> = None;
    let mut pairs: Vec<(f64, u8)> = Vec::with_capacity(n);
    for &f in &sorted {
        let col = &columns[f];
        pairs.clear();
        pairs.extend(rows.iter().map(|&i| (col[i], y[i])));
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mut l0, mut l1) = (0.0, 0.0);
        for i in 0..n - 1 {
            if pairs[i].1 == 1 {
                l1 += 1.0;
            } else {
                l0 += 1.0;
            }
            let n_left = i + 1;
            if n_left < min_leaf {
                continue;
            }
            if n - n_left < min_leaf {
                break;
            }
            let (a, b) = (pairs[i].0, pairs[i + 1].0);
            if a >= b {
                continue;
            }
            let (r0, r1) = (t0 - l0, t1 - l1);
            let weighted = ((l0 + l1) * gini2(l0, l1) + (r0 + r1) * gini2(r0, r1)) / n as f64;
            if best.is_none_or(|s| weighted < s.weighted_impurity) {
                let mid = a + (b - a) / 2.0;
                best = Some(Split {
                    feature: f,
                    threshold: if mid < b { mid } else { a },
                    gain: parent - weighted,
                    weighted_impurity: weighted,
                });
            }
        }
    }
    best
}

fn features_sorted(candidates: &[usize]) -> Vec<usize> {
    let mut v = candidates.to_vec();
    v.sort_unstable();
    v
}

/// Grows a tree on `dataset`. Per node, `features_per_split` candidate
/// features are drawn uniformly without replacement from `stream`; nodes
/// are expanded depth-first, left subtree before right.
pub fn fit_tree(dataset: &Dataset, params: &TreeParams, stream: &mut Stream) -> Result<DecisionTree> {
    let rows: Vec<usize> = (0..dataset.n_rows()).collect();
    let columns: Vec<Vec<f64>> = (0..dataset.n_features()).map(|j| dataset.column(j).to_vec()).collect();
    fit_tree_on(&columns, dataset.labels(), rows, params, stream)
}

/// Grows a tree on the given row multiset (duplicates count as repeated samples).
pub(crate) fn fit_tree_on(
    columns: &[Vec<f64>],
    y: &[u8],
    rows: Vec<usize>,
    params: &TreeParams,
    stream: &mut Stream,
) -> Result<DecisionTree> {
    if rows.is_empty() {
        return Err(Error::Training("cannot fit a tree on an empty dataset".into()));
    }
    let p = columns.len();
    params.validate(p)?;
    let m = params.features_per_split.resolve(p);

    let mut nodes: Vec<Node> = Vec::new();
    // (node slot, rows, depth)
    let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(0, rows, 0)];
    nodes.push(Node::Leaf { counts: [0, 0] });
    while let Some((slot, rows, depth)) = stack.pop() {
        let ones = rows.iter().filter(|&&i| y[i] == 1).count() as u32;
        let counts = [rows.len() as u32 - ones, ones];
        let depth_ok = params.max_depth.is_none_or(|d| depth < d);
        let split = if depth_ok && counts[0] > 0 && counts[1] > 0 {
            let candidates: Vec<usize> = if m == p {
                (0..p).collect()
            } else {
                index::sample(stream, p, m).into_vec()
            };
            best_split_columns(columns, y, &rows, &candidates, params)
        } else {
            None
        };
        match split {
            None => nodes[slot] = Node::Leaf { counts },
            Some(s) => {
                let col = &columns[s.feature];
                let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&i| col[i] <= s.threshold);
                let left = nodes.len();
                nodes.push(Node::Leaf { counts: [0, 0] });
                let right = nodes.len();
                nodes.push(Node::Leaf { counts: [0, 0] });
                nodes[slot] = Node::Split {
                    feature: s.feature,
                    threshold: s.threshold,
                    left,
                    right,
                    counts,
                };
                stack.push((right, right_rows, depth + 1));
                stack.push((left, left_rows, depth + 1));
            }
        }
    }
    Ok(DecisionTree { nodes, n_features: p })
}

impl DecisionTree {
    pub fn leaf_for(&self, row: ArrayView1<f64>) -> &Node {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if row[*feature] <= *threshold { *left } else { *right },
                leaf => return leaf,
            }
        }
    }

    /// Majority class of the reached leaf (ties go to class 0).
    pub fn vote(&self, row: ArrayView1<f64>) -> u8 {
        let c = self.leaf_for(row).counts();
        u8::from(c[1] > c[0])
    }

    /// Labels and positive-class leaf fractions.
    pub fn predict(&self, x: &Array2<f64>) -> Result<Vec<(u8, f64)>> {
        if x.ncols() != self.n_features {
            return Err(Error::Width {
                expected: self.n_features,
                actual: x.ncols(),
            });
        }
        Ok(x.rows()
            .into_iter()
            .map(|r| {
                let c = self.leaf_for(r).counts();
                (u8::from(c[1] > c[0]), c[1] as f64 / (c[0] + c[1]) as f64)
            })
            .collect())
    }

    /// Depth of the deepest leaf (a lone root has depth 0).
    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, d)) = stack.pop() {
            max = max.max(d);
            if let Node::Split { left, right, .. } = self.nodes[i] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        max
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ColumnKind;
    use crate::rng;
    use ndarray::array;

    fn ds(x: Array2<f64>, y: Vec<u8>) -> Dataset {
        let p = x.ncols();
        let n = x.nrows();
        Dataset::new(x, (0..p).map(|j| format!("f{j}")).collect(), vec![ColumnKind::Numeric; p], y, vec!["g".into(); n]).unwrap()
    }

    fn all(p: usize) -> Vec<usize> {
        (0..p).collect()
    }

    #[test]
    fn midpoint_threshold_on_separable_line() {
        let x = array![[1.0], [2.0], [8.0], [9.0]];
        let y = [0, 0, 1, 1];
        // Oracle: enumerate the three midpoints 1.5, 5.0, 8.5 by hand.
        let mut best = (f64::INFINITY, 0.0);
        for (k, thr) in [1.5, 5.0, 8.5].into_iter().enumerate() {
            let left: Vec<u8> = y[..=k].to_vec();
            let right: Vec<u8> = y[k + 1..].to_vec();
            let g = |v: &[u8]| {
                let p = v.iter().filter(|&&l| l == 1).count() as f64 / v.len() as f64;
                1.0 - p * p - (1.0 - p) * (1.0 - p)
            };
            let w = (left.len() as f64 * g(&left) + right.len() as f64 * g(&right)) / 4.0;
            if w < best.0 {
                best = (w, thr);
            }
        }
        let s = best_split(&x, &y, &[0, 1, 2, 3], &[0], &TreeParams::unbounded()).unwrap();
        assert_eq!(s.threshold, best.1);
        assert_eq!(s.threshold, 5.0);
        assert_eq!(s.weighted_impurity, 0.0);
        assert_eq!(s.gain, 0.5);
    }

    #[test]
    fn identical_rows_have_no_split() {
        let x = array![[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]];
        assert!(best_split(&x, &[0, 1, 0], &[0, 1, 2], &all(2), &TreeParams::unbounded()).is_none());
    }

    #[test]
    fn equal_gain_prefers_lower_feature() {
        let x = array![[0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [1.0, 1.0]];
        let s = best_split(&x, &[0, 0, 1, 1], &[0, 1, 2, 3], &[1, 0], &TreeParams::unbounded()).unwrap();
        assert_eq!(s.feature, 0);
    }

    #[test]
    fn min_leaf_excludes_splits() {
        let x = array![[1.0], [2.0], [3.0], [4.0]];
        let params = TreeParams { min_samples_leaf: 2, ..TreeParams::unbounded() };
        let s = best_split(&x, &[1, 0, 0, 0], &[0, 1, 2, 3], &[0], &params).unwrap();
        assert_eq!(s.threshold, 2.5);
        let params = TreeParams { min_samples_leaf: 3, ..TreeParams::unbounded() };
        assert!(best_split(&x, &[1, 0, 0, 0], &[0, 1, 2, 3], &[0], &params).is_none());
    }

    #[test]
    fn separable_line_fits_perfectly() {
        let x = Array2::from_shape_fn((50, 1), |(i, _)| i as f64);
        let y: Vec<u8> = (0..50).map(|i| u8::from(i >= 23)).collect();
        let d = ds(x.clone(), y.clone());
        let t = fit_tree(&d, &TreeParams::unbounded(), &mut rng::stream(1)).unwrap();
        let pred: Vec<u8> = t.predict(&x).unwrap().into_iter().map(|p| p.0).collect();
        assert_eq!(pred, y);
    }

    #[test]
    fn depth_one_is_a_stump() {
        let x = Array2::from_shape_fn((40, 2), |(i, j)| ((i * 7 + j * 3) % 13) as f64);
        let y: Vec<u8> = (0..40).map(|i| u8::from(i % 3 == 0)).collect();
        let params = TreeParams { max_depth: Some(1), ..TreeParams::unbounded() };
        let t = fit_tree(&ds(x, y), &params, &mut rng::stream(1)).unwrap();
        assert_eq!(t.n_splits(), 1);
        assert_eq!(t.depth(), 1);
        assert!(TreeParams { max_depth: Some(0), ..params }.validate(2).is_err());
    }

    #[test]
    fn xor_is_shattered_with_depth_two() {
        let x = array![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]];
        let y = vec![0, 1, 1, 0];
        let params = TreeParams { max_depth: Some(2), ..TreeParams::unbounded() };
        let t = fit_tree(&ds(x.clone(), y.clone()), &params, &mut rng::stream(0)).unwrap();
        let pred: Vec<u8> = t.predict(&x).unwrap().into_iter().map(|p| p.0).collect();
        assert_eq!(pred, y);
    }

    #[test]
    fn single_class_gives_single_leaf() {
        let x = array![[0.0], [5.0], [9.0]];
        let t = fit_tree(&ds(x, vec![1, 1, 1]), &TreeParams::unbounded(), &mut rng::stream(0)).unwrap();
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.predict(&array![[-100.0], [100.0]]).unwrap(), vec![(1, 1.0), (1, 1.0)]);
    }

    #[test]
    fn width_mismatch_rejected() {
        let x = array![[0.0], [5.0]];
        let t = fit_tree(&ds(x, vec![0, 1]), &TreeParams::unbounded(), &mut rng::stream(0)).unwrap();
        assert!(matches!(t.predict(&array![[1.0, 2.0]]), Err(Error::Width { .. })));
    }
}
