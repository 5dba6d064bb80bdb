//! Small generated datasets for tests, examples and smoke runs.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Dataset, Split};

/// Two `size`-cliques joined by one bridge edge. Class is the clique id and
/// features are one-hot by clique. Each clique contributes its first
/// `size - 2` nodes to train, one to val and one to test.
pub fn two_cliques(size: usize) -> Dataset {
    assert!(size >= 3, "cliques need at least 3 nodes for a split");
    let n = 2 * size;
    let mut edges = Vec::new();
    for c in 0..2 {
        let base = c * size;
        for i in 0..size {
            for j in i + 1..size {
                edges.push((base + i, base + j));
            }
        }
    }
    edges.push((size - 1, size));
    let labels: Vec<usize> = (0..n).map(|i| i / size).collect();
    let features = Array2::from_shape_fn((n, 2), |(i, j)| if labels[i] == j { 1.0 } else { 0.0 });
    let mut split = Split {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    for c in 0..2 {
        let base = c * size;
        split.train.extend(base..base + size - 2);
        split.val.push(base + size - 2);
        split.test.push(base + size - 1);
    }
    Dataset {
        name: format!("two-cliques-{size}"),
        num_nodes: n,
        num_features: 2,
        num_classes: 2,
        edges,
        features,
        labels,
        fixed_splits: Some(split),
    }
}

/// Erdős–Rényi graph with labels independent of structure. Every class is
/// used; features are uniform noise.
pub fn random_label_graph(
    n: usize,
    edge_prob: f64,
    classes: usize,
    num_features: usize,
    seed: u64,
) -> Dataset {
    assert!(n >= classes && classes > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < edge_prob {
                edges.push((i, j));
            }
        }
    }
    let mut labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
    labels.shuffle(&mut rng);
    let features = Array2::from_shape_fn((n, num_features), |_| rng.gen::<f64>());
    Dataset {
        name: format!("random-labels-{n}"),
        num_nodes: n,
        num_features,
        num_classes: classes,
        edges,
        features,
        labels,
        fixed_splits: None,
    }
}

/// Planted-partition graph with bag-of-words style features.
///
/// Same-class pairs connect with `p_in`, others with `p_out`; so
/// `p_in > p_out` gives a homophilic graph and `p_in < p_out` a
/// heterophilic one. Each class owns a block of "topic" features that fire
/// with `topic_rate`; all other features fire with `noise_rate`.
#[derive(Debug, Clone)]
pub struct PlantedPartition {
    pub n: usize,
    pub classes: usize,
    pub num_features: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub topic_rate: f64,
    pub noise_rate: f64,
    pub seed: u64,
}

impl Default for PlantedPartition {
    fn default() -> Self {
        Self {
            n: 200,
            classes: 3,
            num_features: 60,
            p_in: 0.05,
            p_out: 0.01,
            topic_rate: 0.3,
            noise_rate: 0.05,
            seed: 0,
        }
    }
}

impl PlantedPartition {
    pub fn generate(&self) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut labels: Vec<usize> = (0..self.n).map(|i| i % self.classes).collect();
        labels.shuffle(&mut rng);

        let mut edges = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let p = if labels[i] == labels[j] { self.p_in } else { self.p_out };
                if rng.gen::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }

        let block = (self.num_features / self.classes).max(1);
        let features = Array2::from_shape_fn((self.n, self.num_features), |(i, j)| {
            let rate = if j / block == labels[i] { self.topic_rate } else { self.noise_rate };
            if rng.gen::<f64>() < rate {
                1.0
            } else {
                0.0
            }
        });

        Dataset {
            name: format!(
                "planted-{}-{}-{}",
                self.n, self.classes, if self.p_in >= self.p_out { "homo" } else { "hetero" }
            ),
            num_nodes: self.n,
            num_features: self.num_features,
            num_classes: self.classes,
            edges,
            features,
            labels,
            fixed_splits: None,
        }
    }
}

/// Planetoid-style split: `per_class` training nodes per class, then the
/// next `val` and `test` nodes of a seeded shuffle.
pub fn per_class_split(ds: &Dataset, per_class: usize, val: usize, test: usize, seed: u64) -> Split {
    let mut order: Vec<usize> = (0..ds.num_nodes).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut taken = vec![0usize; ds.num_classes];
    let mut train = Vec::new();
    let mut rest = Vec::new();
    for i in order {
        let c = ds.labels[i];
        if taken[c] < per_class {
            taken[c] += 1;
            train.push(i);
        } else {
            rest.push(i);
        }
    }
    let val_part: Vec<usize> = rest.iter().copied().take(val).collect();
    let test_part: Vec<usize> = rest.iter().copied().skip(val).take(test).collect();
    let mut split = Split {
        train,
        val: val_part,
        test: test_part,
    };
    split.train.sort_unstable();
    split.val.sort_unstable();
    split.test.sort_unstable();
    split
}
