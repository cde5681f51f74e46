//! CART classification trees with Gini splitting and bagged random forests.

mod forest;
mod gini;
mod tree;

pub use forest::{fit_forest, gini_importance, Forest, RfParams};
pub use gini::gini;
pub use tree::{best_split, fit_tree, DecisionTree, FeatureSubset, Node, Split, TreeParams};
