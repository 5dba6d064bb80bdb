use std::collections::BTreeSet;

use aopf::data::synthetic::{random_label_graph, two_cliques, PlantedPartition};
use aopf::data::{load_dataset, make_folds, save_dataset, validate_dataset, Dataset, NUM_FOLDS};
use proptest::prelude::*;

const MINIMAL: &str = r#"{
  "name": "pair",
  "num_nodes": 2,
  "num_features": 2,
  "num_classes": 2,
  "edges": [[0, 1]],
  "features": {"dense": [1.0, 0.0, 0.0, 1.0]},
  "labels": [0, 1]
}"#;

#[test]
fn minimal_fixture_loads() {
    let ds = Dataset::from_json(MINIMAL).unwrap();
    assert_eq!(ds.num_nodes, 2);
    assert_eq!(ds.edges, vec![(0, 1)]);
    assert!(ds.fixed_splits.is_none());
}

#[test]
fn sparse_features_are_densified() {
    let text = MINIMAL.replace(r#"{"dense": [1.0, 0.0, 0.0, 1.0]}"#, r#"{"sparse": [[0, 0, 1.0], [1, 1, 2.5]]}"#);
    let ds = Dataset::from_json(&text).unwrap();
    assert_eq!(ds.features, ndarray::array![[1.0, 0.0], [0.0, 2.5]]);
}

#[test]
fn label_out_of_range_names_the_node() {
    let text = MINIMAL.replace(r#""labels": [0, 1]"#, r#""labels": [0, 2]"#);
    let err = Dataset::from_json(&text).unwrap_err();
    assert_eq!(err.kind(), "ValidationError");
    assert!(err.to_string().contains("node 1"), "{err}");
}

#[test]
fn schema_problems_are_schema_errors() {
    let missing = MINIMAL.replace(r#""num_classes": 2,"#, "");
    assert_eq!(Dataset::from_json(&missing).unwrap_err().kind(), "SchemaError");
    let wrong_type = MINIMAL.replace(r#""num_nodes": 2"#, r#""num_nodes": "two""#);
    assert_eq!(Dataset::from_json(&wrong_type).unwrap_err().kind(), "SchemaError");
    let short = MINIMAL.replace("[1.0, 0.0, 0.0, 1.0]", "[1.0, 0.0]");
    assert_eq!(Dataset::from_json(&short).unwrap_err().kind(), "SchemaError");
    assert_eq!(load_dataset("/nonexistent/aopf/missing.json").unwrap_err().kind(), "SchemaError");
}

#[test]
fn invariant_breaches_are_reported() {
    let selfloop = MINIMAL.replace("[[0, 1]]", "[[0, 1], [1, 1]]");
    assert_eq!(Dataset::from_json(&selfloop).unwrap_err().kind(), "ValidationError");
    let bad_edge = MINIMAL.replace("[[0, 1]]", "[[0, 3]]");
    assert_eq!(Dataset::from_json(&bad_edge).unwrap_err().kind(), "ValidationError");
    let missing_class = MINIMAL.replace(r#""labels": [0, 1]"#, r#""labels": [0, 0]"#);
    assert_eq!(Dataset::from_json(&missing_class).unwrap_err().kind(), "ValidationError");
    let overlapping = MINIMAL.replace(r#""labels": [0, 1]"#, r#""labels": [0, 1], "splits": {"train": [0], "val": [0], "test": [1]}"#);
    assert_eq!(Dataset::from_json(&overlapping).unwrap_err().kind(), "ValidationError");
}

#[test]
fn duplicate_edges_are_counted_once() {
    let text = MINIMAL.replace("[[0, 1]]", "[[0, 1], [0, 1], [1, 0]]");
    let ds = Dataset::parse_unchecked(&text).unwrap();
    let rep = validate_dataset(&ds);
    assert_eq!(rep.num_edges, 1);
    assert_eq!(rep.duplicate_edges, 2);
}

#[test]
fn homophily_of_toy_graphs() {
    let rep = validate_dataset(&two_cliques(5));
    assert!(rep.is_valid());
    // 2 × C(5,2) same-label edges plus one bridge
    assert!((rep.homophily - 20.0 / 21.0).abs() < 1e-12);
    assert_eq!(rep.class_histogram, vec![5, 5]);

    let homs: Vec<f64> = (0..5).map(|s| validate_dataset(&random_label_graph(400, 0.05, 2, 4, s)).homophily).collect();
    for h in homs {
        assert!((h - 0.5).abs() <= 0.05, "homophily {h}");
    }
}

#[test]
fn round_trip_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    for ds in [two_cliques(6), random_label_graph(50, 0.1, 3, 5, 2), PlantedPartition::default().generate()] {
        let path = dir.path().join(format!("{}.json", ds.name));
        save_dataset(&ds, &path).unwrap();
        let back = load_dataset(&path).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back.to_json().unwrap(), ds.to_json().unwrap());
    }
}

#[test]
fn ten_nodes_give_singleton_test_folds() {
    let ds = random_label_graph(10, 0.3, 2, 3, 0);
    let plan = make_folds(&ds, 17).unwrap();
    assert!(plan.folds.iter().all(|f| f.test.len() == 1));
    let small = random_label_graph(9, 0.3, 2, 3, 0);
    assert_eq!(make_folds(&small, 0).unwrap_err().kind(), "TooFewNodes");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn folds_partition_the_nodes(n in 10usize..400, seed in any::<u64>()) {
        let ds = random_label_graph(n, 0.0, 2, 1, 0);
        let plan = make_folds(&ds, seed).unwrap();
        prop_assert_eq!(plan.folds.len(), NUM_FOLDS);
        let mut tests = Vec::new();
        for (i, f) in plan.folds.iter().enumerate() {
            let (tr, va, te): (BTreeSet<_>, BTreeSet<_>, BTreeSet<_>) = (
                f.train.iter().copied().collect(),
                f.val.iter().copied().collect(),
                f.test.iter().copied().collect(),
            );
            prop_assert!(tr.is_disjoint(&va) && tr.is_disjoint(&te) && va.is_disjoint(&te));
            prop_assert_eq!(tr.len() + va.len() + te.len(), n);
            prop_assert!(te.len() == n / 10 || te.len() == n / 10 + 1);
            prop_assert_eq!(&f.val, &plan.folds[(i + 1) % NUM_FOLDS].test);
            tests.extend(f.test.iter().copied());
        }
        tests.sort_unstable();
        prop_assert_eq!(tests, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(make_folds(&ds, seed).unwrap(), plan);
    }
}
