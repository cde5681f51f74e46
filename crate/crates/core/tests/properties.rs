use auditml_core::dataset::ColumnKind;
use auditml_core::eval::{stratified_folds, ConfusionMatrix};
use auditml_core::knn::{fit_knn, KnnParams};
use auditml_core::preprocess::{smote, SmoteParams};
use auditml_core::trees::{fit_tree, gini, TreeParams};
use auditml_core::{rng, Dataset};
use ndarray::Array2;
use proptest::prelude::*;

fn dataset(x: Array2<f64>, y: Vec<u8>) -> Dataset {
    let (n, p) = x.dim();
    Dataset::new(x, (0..p).map(|j| format!("x{j}")).collect(), vec![ColumnKind::Numeric; p], y, vec!["g".into(); n])
        .unwrap()
}

fn matrix(rows: &[Vec<f64>]) -> Array2<f64> {
    let p = rows[0].len();
    Array2::from_shape_fn((rows.len(), p), |(i, j)| rows[i][j])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gini_bounded(counts in prop::collection::vec(0u64..50, 2..5)) {
        prop_assume!(counts.iter().sum::<u64>() > 0);
        let g = gini(&counts).unwrap();
        let k = counts.len() as f64;
        prop_assert!(g >= 0.0 && g <= 1.0 - 1.0 / k + 1e-12);
    }

    #[test]
    fn confusion_counts_partition(pairs in prop::collection::vec((0u8..2, 0u8..2), 1..100)) {
        let (pred, truth): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let cm = ConfusionMatrix::from_predictions(&pred, &truth).unwrap();
        prop_assert_eq!(cm.total(), pred.len() as u64);
        prop_assert_eq!(cm.tp + cm.fn_, truth.iter().filter(|&&y| y == 1).count() as u64);
        let m = cm.metrics();
        for v in m.as_array() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn folds_partition_and_balance(labels in prop::collection::vec(0u8..2, 12..80), k in 2usize..6, seed in any::<u64>()) {
        let counts = [labels.iter().filter(|&&l| l == 0).count(), labels.iter().filter(|&&l| l == 1).count()];
        prop_assume!(counts.iter().all(|&c| c == 0 || c + 1 >= k));
        let folds = stratified_folds(&labels, k, seed).unwrap();
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        for f in &folds {
            for c in 0..2 {
                let m = f.iter().filter(|&&i| labels[i] == c as u8).count();
                prop_assert!(m == counts[c] / k || m == counts[c].div_ceil(k));
            }
        }
        prop_assert_eq!(stratified_folds(&labels, k, seed).unwrap(), folds);
    }

    #[test]
    fn kneighbors_matches_sorting(rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 5..60),
                                  q in prop::collection::vec(-5.0f64..5.0, 2), k in 1usize..4) {
        let n = rows.len();
        let m = fit_knn(&dataset(matrix(&rows), (0..n).map(|i| (i % 2) as u8).collect()), &KnnParams::default()).unwrap();
        let query = ndarray::Array1::from(q.clone());
        let got = m.kneighbors(query.view(), k).unwrap();
        let mut want: Vec<(usize, f64)> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| (i, ((r[0] - q[0]).powi(2) + (r[1] - q[1]).powi(2)).sqrt()))
            .collect();
        want.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        want.truncate(k);
        prop_assert_eq!(got, want);
    }

    #[test]
    fn smote_keeps_originals_and_balances(seed in any::<u64>(), n_min in 6usize..20) {
        let n = 60;
        let mut s = rng::stream(seed);
        let x = Array2::from_shape_fn((n, 2), |_| rand::Rng::random::<f64>(&mut s));
        let y: Vec<u8> = (0..n).map(|i| (i < n_min) as u8).collect();
        let d = dataset(x, y);
        let out = smote(&d, &SmoteParams::default(), seed).unwrap();
        prop_assert_eq!(out.features().slice(ndarray::s![..n, ..]), d.features().view());
        let [neg, pos] = out.class_counts();
        prop_assert_eq!(neg, n - n_min);
        prop_assert_eq!(pos, neg);
        for i in n..out.n_rows() {
            let r = out.row(i);
            prop_assert!(r.iter().all(|v| (0.0..1.0).contains(v)));
        }
    }

    #[test]
    fn unbounded_tree_invariant_to_monotone_warp(rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 2), 5..60), seed in any::<u64>()) {
        let n = rows.len();
        let y: Vec<u8> = (0..n).map(|i| u8::from(rows[i][0] > 0.5)).collect();
        prop_assume!(y.contains(&0) && y.contains(&1));
        let x = matrix(&rows);
        let w = x.mapv(|v| v.exp() + 3.0 * v);
        let params = TreeParams::unbounded();
        let a = fit_tree(&dataset(x.clone(), y.clone()), &params, &mut rng::stream(seed)).unwrap();
        let b = fit_tree(&dataset(w.clone(), y), &params, &mut rng::stream(seed)).unwrap();
        prop_assert_eq!(a.predict(&x).unwrap(), b.predict(&w).unwrap());
    }
}
