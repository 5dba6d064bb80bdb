//! Dataset container, validation and fold generation.
//!
//! On disk a dataset is one JSON document:
//!
//! ```json
//! {
//!   "name": "cora",
//!   "num_nodes": 2708, "num_features": 1433, "num_classes": 7,
//!   "edges": [[0, 633], [0, 1862], ...],
//!   "features": {"sparse": [[0, 19, 1.0], ...]},
//!   "labels": [3, 4, ...],
//!   "splits": {"train": [...], "val": [...], "test": [...]}
//! }
//! ```
//!
//! `features` is either `{"dense": [n*f reals, row-major]}` or
//! `{"sparse": [[row, col, value], ...]}`; `splits` is optional.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AopfError, Result};
use crate::graph::SparseGraph;

pub mod synthetic;

pub const NUM_FOLDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    /// Checks that the three parts are non-empty, in range and disjoint.
    pub fn check(&self, num_nodes: usize) -> Result<()> {
        let mut seen = vec![false; num_nodes];
        for (part, idx) in [("train", &self.train), ("val", &self.val), ("test", &self.test)] {
            if idx.is_empty() {
                return Err(AopfError::ValidationError(format!("split part '{part}' is empty")));
            }
            for &i in idx {
                if i >= num_nodes {
                    return Err(AopfError::ValidationError(format!(
                        "split part '{part}' references node {i} >= {num_nodes}"
                    )));
                }
                if seen[i] {
                    return Err(AopfError::ValidationError(format!(
                        "node {i} appears twice across split parts"
                    )));
                }
                seen[i] = true;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub num_nodes: usize,
    pub num_features: usize,
    pub num_classes: usize,
    pub edges: Vec<(usize, usize)>,
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub fixed_splits: Option<Split>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum FeatureBlock {
    Dense(Vec<f64>),
    Sparse(Vec<(usize, usize, f64)>),
}

#[derive(Debug, Serialize, Deserialize)]
struct Container {
    name: String,
    num_nodes: usize,
    num_features: usize,
    num_classes: usize,
    edges: Vec<(usize, usize)>,
    features: FeatureBlock,
    labels: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    splits: Option<Split>,
}

impl Dataset {
    /// Parses and validates a container document.
    pub fn from_json(text: &str) -> Result<Self> {
        let ds = Self::parse_unchecked(text)?;
        let report = validate_dataset(&ds);
        if let Some(first) = report.violations.first() {
            return Err(AopfError::ValidationError(first.clone()));
        }
        Ok(ds)
    }

    /// Parses a container without invariant checks, for inspection tooling.
    pub fn parse_unchecked(text: &str) -> Result<Self> {
        let c: Container =
            serde_json::from_str(text).map_err(|e| AopfError::SchemaError(e.to_string()))?;
        let (n, f) = (c.num_nodes, c.num_features);
        let features = match c.features {
            FeatureBlock::Dense(v) => {
                if v.len() != n * f {
                    return Err(AopfError::SchemaError(format!(
                        "dense features hold {} values, expected {n}x{f}",
                        v.len()
                    )));
                }
                Array2::from_shape_vec((n, f), v).expect("length checked")
            }
            FeatureBlock::Sparse(triples) => {
                let mut out = Array2::zeros((n, f));
                for (r, col, v) in triples {
                    if r >= n || col >= f {
                        return Err(AopfError::ValidationError(format!(
                            "sparse feature entry ({r}, {col}) outside {n}x{f}"
                        )));
                    }
                    out[[r, col]] = v;
                }
                out
            }
        };
        Ok(Dataset {
            name: c.name,
            num_nodes: n,
            num_features: f,
            num_classes: c.num_classes,
            edges: c.edges,
            features,
            labels: c.labels,
            fixed_splits: c.splits,
        })
    }

    /// Serializes to the container format. Features are written sparse when
    /// that is shorter.
    pub fn to_json(&self) -> Result<String> {
        if self.features.iter().any(|v| !v.is_finite()) {
            return Err(AopfError::ValidationError("non-finite feature value".into()));
        }
        let nnz = self.features.iter().filter(|&&v| v != 0.0).count();
        let features = if 3 * nnz < self.features.len() {
            FeatureBlock::Sparse(
                self.features
                    .indexed_iter()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|((r, c), &v)| (r, c, v))
                    .collect(),
            )
        } else {
            FeatureBlock::Dense(self.features.iter().copied().collect())
        };
        let c = Container {
            name: self.name.clone(),
            num_nodes: self.num_nodes,
            num_features: self.num_features,
            num_classes: self.num_classes,
            edges: self.edges.clone(),
            features,
            labels: self.labels.clone(),
            splits: self.fixed_splits.clone(),
        };
        serde_json::to_string(&c).map_err(|e| AopfError::SchemaError(e.to_string()))
    }

    pub fn graph(&self) -> Result<SparseGraph> {
        SparseGraph::from_edge_list(&self.edges, self.num_nodes, true)
    }

    pub fn all_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes).collect()
    }
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| {
        AopfError::SchemaError(format!("cannot read {}: {e}", path.display()))
    })?;
    Dataset::from_json(&text)
}

pub fn save_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, ds.to_json()?)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub class_histogram: Vec<usize>,
    /// Distinct undirected edges.
    pub num_edges: usize,
    pub duplicate_edges: usize,
    /// Fraction of distinct edges whose endpoints share a label.
    pub homophily: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every invariant breach without failing.
pub fn validate_dataset(ds: &Dataset) -> ValidationReport {
    let n = ds.num_nodes;
    let mut violations = Vec::new();

    if ds.labels.len() != n {
        violations.push(format!("{} labels for {n} nodes", ds.labels.len()));
    }
    if ds.features.dim() != (n, ds.num_features) {
        violations.push(format!(
            "features are {}x{}, expected {n}x{}",
            ds.features.nrows(),
            ds.features.ncols(),
            ds.num_features
        ));
    }
    if let Some(((r, c), _)) = ds.features.indexed_iter().find(|(_, v)| !v.is_finite()) {
        violations.push(format!("non-finite feature at ({r}, {c})"));
    }

    let mut class_histogram = vec![0usize; ds.num_classes];
    for (node, &label) in ds.labels.iter().enumerate() {
        match class_histogram.get_mut(label) {
            Some(count) => *count += 1,
            None => violations.push(format!(
                "node {node} has label {label}, but num_classes is {}",
                ds.num_classes
            )),
        }
    }
    for (c, &count) in class_histogram.iter().enumerate() {
        if count == 0 {
            violations.push(format!("class {c} has no nodes"));
        }
    }

    let mut distinct = BTreeSet::new();
    let mut duplicate_edges = 0;
    for (e, &(s, d)) in ds.edges.iter().enumerate() {
        if s >= n || d >= n {
            violations.push(format!("edge {e} ({s}, {d}) references a node >= {n}"));
            continue;
        }
        if s == d {
            violations.push(format!("edge {e} is a self-loop on node {s}"));
            continue;
        }
        if !distinct.insert((s.min(d), s.max(d))) {
            duplicate_edges += 1;
        }
    }
    let same = distinct
        .iter()
        .filter(|&&(s, d)| matches!((ds.labels.get(s), ds.labels.get(d)), (Some(a), Some(b)) if a == b))
        .count();
    let homophily = if distinct.is_empty() {
        0.0
    } else {
        same as f64 / distinct.len() as f64
    };

    if let Some(split) = &ds.fixed_splits {
        let mut seen = vec![false; n];
        for (part, idx) in [("train", &split.train), ("val", &split.val), ("test", &split.test)] {
            for &i in idx {
                if i >= n {
                    violations.push(format!("split '{part}' references node {i} >= {n}"));
                } else if seen[i] {
                    violations.push(format!("node {i} appears in more than one split part"));
                } else {
                    seen[i] = true;
                }
            }
        }
    }

    ValidationReport {
        violations,
        class_histogram,
        num_edges: distinct.len(),
        duplicate_edges,
        homophily,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub seed: u64,
    pub folds: Vec<Split>,
}

/// Seeded 10-fold rotation: fold `i` tests on part `i`, validates on part
/// `(i + 1) mod 10` and trains on the remaining eight.
pub fn make_folds(ds: &Dataset, seed: u64) -> Result<FoldPlan> {
    let n = ds.num_nodes;
    if n < NUM_FOLDS {
        return Err(AopfError::TooFewNodes {
            needed: NUM_FOLDS,
            folds: NUM_FOLDS,
            got: n,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut parts = Vec::with_capacity(NUM_FOLDS);
    let mut start = 0;
    for i in 0..NUM_FOLDS {
        let len = n / NUM_FOLDS + usize::from(i < n % NUM_FOLDS);
        let mut part = order[start..start + len].to_vec();
        part.sort_unstable();
        parts.push(part);
        start += len;
    }

    let folds = (0..NUM_FOLDS)
        .map(|i| {
            let v = (i + 1) % NUM_FOLDS;
            let mut train: Vec<usize> = (0..NUM_FOLDS)
                .filter(|&j| j != i && j != v)
                .flat_map(|j| parts[j].iter().copied())
                .collect();
            train.sort_unstable();
            Split {
                train,
                val: parts[v].clone(),
                test: parts[i].clone(),
            }
        })
        .collect();
    Ok(FoldPlan { seed, folds })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "pair", "num_nodes": 2, "num_features": 2, "num_classes": 2,
        "edges": [[0, 1]],
        "features": {"dense": [1.0, 0.0, 0.0, 1.0]},
        "labels": [0, 1]
    }"#;

    #[test]
    fn minimal_fixture_loads() {
        let ds = Dataset::from_json(MINIMAL).unwrap();
        assert_eq!(ds.num_nodes, 2);
        assert_eq!(ds.features[[1, 1]], 1.0);
        assert!(ds.fixed_splits.is_none());
    }

    #[test]
    fn label_out_of_range_names_node() {
        let bad = MINIMAL.replace("\"labels\": [0, 1]", "\"labels\": [0, 2]");
        match Dataset::from_json(&bad) {
            Err(AopfError::ValidationError(msg)) => assert!(msg.contains("node 1"), "{msg}"),
            other => panic!("expected ValidationError, got {other:?}"),
        }
    }

    #[test]
    fn schema_errors() {
        let missing = MINIMAL.replace("\"labels\": [0, 1]", "\"lbls\": [0, 1]");
        assert!(matches!(Dataset::from_json(&missing), Err(AopfError::SchemaError(_))));
        let wrong_type = MINIMAL.replace("\"num_nodes\": 2", "\"num_nodes\": \"two\"");
        assert!(matches!(Dataset::from_json(&wrong_type), Err(AopfError::SchemaError(_))));
        let short = MINIMAL.replace("[1.0, 0.0, 0.0, 1.0]", "[1.0, 0.0]");
        assert!(matches!(Dataset::from_json(&short), Err(AopfError::SchemaError(_))));
        let nan = MINIMAL.replace("[1.0, 0.0, 0.0, 1.0]", "[1.0, NaN, 0.0, 1.0]");
        assert!(matches!(Dataset::from_json(&nan), Err(AopfError::SchemaError(_))));
        assert!(matches!(load_dataset("/nonexistent/missing.json"), Err(AopfError::SchemaError(_))));
    }

    #[test]
    fn sparse_features_densify() {
        let text = MINIMAL.replace(
            "{\"dense\": [1.0, 0.0, 0.0, 1.0]}",
            "{\"sparse\": [[0, 0, 1.0], [1, 1, 2.5]]}",
        );
        let ds = Dataset::from_json(&text).unwrap();
        assert_eq!(ds.features, ndarray::array![[1.0, 0.0], [0.0, 2.5]]);
        let oob = text.replace("[1, 1, 2.5]", "[1, 2, 2.5]");
        assert!(matches!(Dataset::from_json(&oob), Err(AopfError::ValidationError(_))));
    }

    #[test]
    fn overlapping_splits_are_rejected() {
        let text = MINIMAL.replace(
            "\"labels\": [0, 1]",
            "\"labels\": [0, 1], \"splits\": {\"train\": [0], \"val\": [0], \"test\": [1]}",
        );
        assert!(matches!(Dataset::from_json(&text), Err(AopfError::ValidationError(_))));
    }

    #[test]
    fn duplicate_edges_are_counted_once() {
        let text = MINIMAL.replace("[[0, 1]]", "[[0, 1], [1, 0], [0, 1]]");
        let ds = Dataset::from_json(&text).unwrap();
        let r = validate_dataset(&ds);
        assert!(r.is_valid());
        assert_eq!(r.num_edges, 1);
        assert_eq!(r.duplicate_edges, 2);
        assert_eq!(r.class_histogram, vec![1, 1]);
        assert_eq!(r.homophily, 0.0);
    }

    #[test]
    fn report_lists_all_violations() {
        let mut ds = Dataset::from_json(MINIMAL).unwrap();
        ds.labels = vec![0, 0];
        ds.edges.push((1, 1));
        let r = validate_dataset(&ds);
        assert_eq!(r.violations.len(), 2, "{:?}", r.violations);
    }

    #[test]
    fn folds_on_ten_nodes() {
        let ds = synthetic::two_cliques(5);
        let plan = make_folds(&ds, 3).unwrap();
        assert_eq!(plan.folds.len(), NUM_FOLDS);
        for f in &plan.folds {
            assert_eq!(f.test.len(), 1);
            assert_eq!(f.val.len(), 1);
            assert_eq!(f.train.len(), 8);
        }
        let mut all: Vec<usize> = plan.folds.iter().flat_map(|f| f.test.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(plan, make_folds(&ds, 3).unwrap());
    }

    #[test]
    fn too_few_nodes_for_folds() {
        let ds = Dataset::from_json(MINIMAL).unwrap();
        assert!(matches!(make_folds(&ds, 0), Err(AopfError::TooFewNodes { got: 2, .. })));
    }
}
