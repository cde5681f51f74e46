use auditml_core::eval::{compare_models, cross_validate, figure_aggregates, record_correlations};
use auditml_core::label::derive_labels;
use auditml_core::preprocess::{PrepPlan, Preprocessor, WindowSpec};
use auditml_core::record::{parse_records, write_records};
use auditml_core::synthgen::{generate, SynthConfig};
use auditml_core::{Error, LabelSpec, ModelSpec, TrainedModel};

fn records(n: usize, seed: u64) -> Vec<auditml_core::AuditRecord> {
    generate(&SynthConfig { n_records: n, ..Default::default() }, seed).unwrap()
}

#[test]
fn csv_round_trip_through_text() {
    let recs = records(300, 1);
    let text = write_records(&recs);
    assert_eq!(parse_records(&text).unwrap(), recs);
}

#[test]
fn generate_prepare_compare() {
    let recs = records(600, 2);
    let labels = derive_labels(&recs, &LabelSpec::default()).unwrap();
    let pre = Preprocessor::fit(&recs, &PrepPlan::default()).unwrap();
    let data = pre.transform(&recs, &labels).unwrap().dataset;
    assert_eq!(data.n_rows(), 600);
    let table = compare_models(&ModelSpec::defaults(), &data, 5, 42).unwrap();
    assert_eq!(table.rows.len(), 3);
    for r in &table.rows {
        assert_eq!(r.folds.len(), 5);
        assert!(r.mean.f1 > 0.5, "{} F1 {}", r.model, r.mean.f1);
    }
    assert!(table.rows.windows(2).all(|w| w[0].mean.f1 >= w[1].mean.f1));
    assert_eq!(compare_models(&ModelSpec::defaults(), &data, 5, 42).unwrap(), table);
}

#[test]
fn constant_baselines_bracket_models() {
    let recs = records(400, 3);
    let labels = derive_labels(&recs, &LabelSpec::default()).unwrap();
    let data = Preprocessor::fit(&recs, &PrepPlan::default()).unwrap().transform(&recs, &labels).unwrap().dataset;
    let zero = cross_validate(&ModelSpec::constant(0), &data, 5, 1).unwrap();
    assert_eq!(zero.mean.f1, 0.0);
    let one = cross_validate(&ModelSpec::constant(1), &data, 5, 1).unwrap();
    assert_eq!(one.mean.recall, 1.0);
}

#[test]
fn fitted_preprocessor_scores_new_records() {
    let (train, fresh) = (records(500, 4), records(50, 5));
    let labels = derive_labels(&train, &LabelSpec::default()).unwrap();
    let pre = Preprocessor::fit(&train, &PrepPlan::default()).unwrap();
    let data = pre.transform(&train, &labels).unwrap().dataset;
    let model = TrainedModel::fit(&ModelSpec::svm(), &data, 9).unwrap();
    let scored = model.predict(&pre.transform_unlabeled(&fresh).unwrap().dataset).unwrap();
    assert_eq!(scored.len(), 50);

    let narrow = data.select_rows(&[0, 1, 2]);
    let knn = TrainedModel::fit(&ModelSpec::knn(), &data, 9).unwrap();
    assert!(knn.predict(&narrow).is_ok());
    let other = Preprocessor::fit(&train, &PrepPlan { derive: None, ..Default::default() }).unwrap();
    let err = knn.predict(&other.transform_unlabeled(&fresh).unwrap().dataset).unwrap_err();
    assert!(matches!(err, Error::Transform { .. }));
}

#[test]
fn windowing_rejects_repeated_firm_years() {
    let recs = records(240, 6);
    let labels = derive_labels(&recs, &LabelSpec::default()).unwrap();
    let plan = PrepPlan {
        window: Some(WindowSpec::default()),
        ..Default::default()
    };
    // Synthetic data holds many records per firm and year; windows need one.
    let pre = Preprocessor::fit(&recs, &plan).unwrap();
    assert!(matches!(pre.transform(&recs, &labels), Err(Error::Window(_))));
}

#[test]
fn report_helpers_cover_all_records() {
    let recs = records(300, 7);
    let m = record_correlations(&recs);
    assert_eq!(m.get("high_risk_cases", "high_risk_cases"), Some(1.0));
    let f = figure_aggregates(&recs);
    let total: u64 = f.high_risk_by_firm_year.iter().map(|r| r.high_risk_cases).sum();
    let direct: u64 = recs.iter().filter_map(|r| r.high_risk_cases).map(u64::from).sum();
    assert_eq!(total, direct);
}
