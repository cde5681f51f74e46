use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng;
use crate::trees::tree::{fit_tree_on, DecisionTree, Node, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfParams {
    pub n_estimators: usize,
    pub tree: TreeParams,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for RfParams {
    fn default() -> Self {
        Self {
            n_estimators: 200,
            tree: TreeParams::default(),
            bootstrap: true,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<DecisionTree>,
    pub feature_names: Vec<String>,
    pub params: RfParams,
    pub tree_seeds: Vec<u64>,
}

/// Fits `n_estimators` trees in parallel. Tree `t` draws its bootstrap
/// sample and its per-node feature subsets from a stream seeded with
/// `derive_seed(params.seed, t)`, so the result does not depend on the
/// number of threads.
pub fn fit_forest(dataset: &Dataset, params: &RfParams) -> Result<Forest> {
    if params.n_estimators == 0 {
        return Err(Error::Parameter("n_estimators must be >= 1".into()));
    }
    dataset.require_both_classes("random forest")?;
    params.tree.validate(dataset.n_features())?;
    let n = dataset.n_rows();
    let columns: Vec<Vec<f64>> = (0..dataset.n_features()).map(|j| dataset.column(j).to_vec()).collect();
    let y = dataset.labels();
    let tree_seeds: Vec<u64> = (0..params.n_estimators as u64).map(|t| rng::derive_seed(params.seed, t)).collect();
    let trees = tree_seeds
        .par_iter()
        .map(|&s| {
            let mut stream = rng::stream(s);
            let rows: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| stream.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            fit_tree_on(&columns, y, rows, &params.tree, &mut stream)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Forest {
        trees,
        feature_names: dataset.feature_names().to_vec(),
        params: *params,
        tree_seeds,
    })
}

impl Forest {
    /// Majority vote over trees (ties go to class 0) with the vote fraction for class 1.
    pub fn predict(&self, x: &Array2<f64>) -> Result<Vec<(u8, f64)>> {
        let p = self.feature_names.len();
        if x.ncols() != p {
            return Err(Error::Width {
                expected: p,
                actual: x.ncols(),
            });
        }
        let n_trees = self.trees.len();
        Ok(x.rows()
            .into_iter()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|r| {
                let ones = self.trees.iter().filter(|t| t.vote(r.view()) == 1).count();
                (u8::from(2 * ones > n_trees), ones as f64 / n_trees as f64)
            })
            .collect())
    }
}

/// Mean decrease in impurity per feature, normalized to sum to 1.
///
/// Within a tree each split contributes `n_t / n_root * (g_t - weighted
/// child impurity)`; tree totals are averaged over the forest.
pub fn gini_importance(forest: &Forest) -> Result<Vec<f64>> {
    let p = forest.feature_names.len();
    let mut total = vec![0.0; p];
    for tree in &forest.trees {
        let n_root = tree.nodes[0].n_samples() as f64;
        for node in &tree.nodes {
            if let Node::Split {
                feature, left, right, ..
            } = node
            {
                let (l, r) = (&tree.nodes[*left], &tree.nodes[*right]);
                let n_t = node.n_samples() as f64;
                let child = (l.n_samples() as f64 * l.impurity() + r.n_samples() as f64 * r.impurity()) / n_t;
                total[*feature] += n_t / n_root * (node.impurity() - child);
            }
        }
    }
    let sum: f64 = total.iter().sum();
    if !(sum > 0.0) {
        return Err(Error::Importance("forest has no impurity-reducing split".into()));
    }
    // Averaging over trees cancels in the normalization.
    Ok(total.into_iter().map(|v| v / sum).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ColumnKind;
    use crate::trees::tree::{fit_tree, FeatureSubset};
    use rand::Rng;

    fn noisy(n: usize, seed: u64) -> Dataset {
        let mut s = rng::stream(seed);
        let x = Array2::from_shape_fn((n, 3), |_| s.random::<f64>());
        let y = (0..n).map(|i| u8::from(x[[i, 0]] + 0.2 * x[[i, 2]] > 0.6)).collect();
        Dataset::new(x, vec!["a".into(), "b".into(), "c".into()], vec![ColumnKind::Numeric; 3], y, vec!["g".into(); n]).unwrap()
    }

    #[test]
    fn single_tree_without_bootstrap_matches_fit_tree() {
        let d = noisy(120, 1);
        let params = RfParams {
            n_estimators: 1,
            bootstrap: false,
            seed: 5,
            ..Default::default()
        };
        let f = fit_forest(&d, &params).unwrap();
        let t = fit_tree(&d, &params.tree, &mut rng::stream(f.tree_seeds[0])).unwrap();
        assert_eq!(f.trees[0], t);
        let q = noisy(50, 2);
        let fp: Vec<u8> = f.predict(q.features()).unwrap().iter().map(|p| p.0).collect();
        let tp: Vec<u8> = t.predict(q.features()).unwrap().iter().map(|p| p.0).collect();
        assert_eq!(fp, tp);
    }

    #[test]
    fn same_seed_same_forest() {
        let d = noisy(200, 3);
        let params = RfParams { n_estimators: 10, ..Default::default() };
        assert_eq!(fit_forest(&d, &params).unwrap(), fit_forest(&d, &params).unwrap());
    }

    #[test]
    fn serial_pool_matches_parallel() {
        let d = noisy(200, 4);
        let params = RfParams { n_estimators: 8, ..Default::default() };
        let par = fit_forest(&d, &params).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let ser = pool.install(|| fit_forest(&d, &params).unwrap());
        assert_eq!(par, ser);
    }

    fn leaf(class: u8) -> DecisionTree {
        let counts = if class == 1 { [0, 3] } else { [3, 0] };
        DecisionTree {
            nodes: vec![Node::Leaf { counts }],
            n_features: 1,
        }
    }

    fn forest_of(votes: &[u8]) -> Forest {
        Forest {
            trees: votes.iter().map(|&v| leaf(v)).collect(),
            feature_names: vec!["x".into()],
            params: RfParams::default(),
            tree_seeds: vec![0; votes.len()],
        }
    }

    #[test]
    fn vote_counting_and_tie() {
        let q = Array2::zeros((1, 1));
        assert_eq!(forest_of(&[1, 1, 0]).predict(&q).unwrap(), vec![(1, 2.0 / 3.0)]);
        assert_eq!(forest_of(&[0, 1]).predict(&q).unwrap(), vec![(0, 0.5)]);
    }

    #[test]
    fn all_leaf_forest_has_no_importance() {
        assert!(matches!(gini_importance(&forest_of(&[1, 0])), Err(Error::Importance(_))));
    }

    #[test]
    fn importance_normalized_and_signal_first() {
        let d = noisy(400, 6);
        let f = fit_forest(&d, &RfParams { n_estimators: 20, ..Default::default() }).unwrap();
        let imp = gini_importance(&f).unwrap();
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(imp[0] > imp[1]);
        assert!(imp.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn single_split_feature_gets_all_importance() {
        let x = Array2::from_shape_fn((20, 2), |(i, j)| if j == 0 { i as f64 } else { 1.0 });
        let y = (0..20).map(|i| u8::from(i >= 10)).collect();
        let d = Dataset::new(x, vec!["a".into(), "b".into()], vec![ColumnKind::Numeric; 2], y, vec!["g".into(); 20]).unwrap();
        let params = RfParams {
            n_estimators: 3,
            tree: TreeParams { features_per_split: FeatureSubset::All, ..TreeParams::unbounded() },
            ..Default::default()
        };
        let imp = gini_importance(&fit_forest(&d, &params).unwrap()).unwrap();
        assert_eq!(imp, vec![1.0, 0.0]);
    }

    #[test]
    fn single_class_rejected() {
        let mut d = noisy(20, 7);
        d = Dataset::new(d.features().clone(), d.feature_names().to_vec(), d.column_kinds().to_vec(), vec![1; 20], d.group_keys().to_vec()).unwrap();
        assert!(fit_forest(&d, &RfParams::default()).is_err());
    }
}
