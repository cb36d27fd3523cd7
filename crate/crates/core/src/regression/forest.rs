//! Random forest of CART regression trees.
//!
//! Tree `k` draws all of its randomness (bootstrap sample, feature subsets)
//! from [`tree_seed`]`(seed, k)`, so trees can be grown in any order or in
//! parallel without changing the result.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_training_data, ForestParams, ModelError, ModelKind, Regressor};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Flat node arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn leaf(value: f64) -> Self {
        RegressionTree {
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &RegressionTree, at: usize) -> usize {
            match t.nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Checks child indices point forward inside the arena and features are
    /// below `n_features`.
    pub(crate) fn validate(&self, n_features: usize) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err("tree has no nodes".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            match *node {
                Node::Leaf { value } if !value.is_finite() => return Err(format!("node {i}: non-finite leaf")),
                Node::Split {
                    feature,
                    left,
                    right,
                    threshold,
                } => {
                    if feature >= n_features {
                        return Err(format!("node {i}: feature {feature} out of range"));
                    }
                    if left <= i || right <= i || left >= self.nodes.len() || right >= self.nodes.len() {
                        return Err(format!("node {i}: bad child index"));
                    }
                    if !threshold.is_finite() {
                        return Err(format!("node {i}: non-finite threshold"));
                    }
                }
                Node::Leaf { .. } => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<RegressionTree>,
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub bootstrap: bool,
    pub max_features: Option<usize>,
    pub seed: u64,
    #[serde(skip)]
    pub(crate) feature_labels: Vec<String>,
}

impl ForestModel {
    /// Wraps pre-built trees, e.g. hand-made stumps.
    pub fn from_trees(trees: Vec<RegressionTree>, feature_labels: Vec<String>) -> Result<Self, ModelError> {
        if trees.is_empty() {
            return Err(ModelError::InvalidParams("a forest needs at least one tree".into()));
        }
        for t in &trees {
            t.validate(feature_labels.len()).map_err(ModelError::InvalidParams)?;
        }
        Ok(ForestModel {
            n_trees: trees.len(),
            trees,
            max_depth: None,
            min_samples_split: 2,
            bootstrap: false,
            max_features: None,
            seed: 0,
            feature_labels,
        })
    }
}

impl Regressor for ForestModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Forest
    }

    fn feature_labels(&self) -> &[String] {
        &self.feature_labels
    }

    fn predict_unchecked(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of tree `k` in a forest seeded with `seed`.
pub fn tree_seed(seed: u64, k: u64) -> u64 {
    mix64(mix64(seed).wrapping_add(k.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

struct Grower<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    max_depth: Option<usize>,
    min_samples_split: usize,
    max_features: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Grower<'_> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let at = self.nodes.len();
        let mean = rows.iter().map(|&r| self.y[r]).sum::<f64>() / rows.len() as f64;
        self.nodes.push(Node::Leaf { value: mean });

        let first = self.y[rows[0]];
        let pure = rows.iter().all(|&r| self.y[r] == first);
        if pure || rows.len() < self.min_samples_split || self.max_depth.is_some_and(|d| depth >= d) {
            return at;
        }
        let Some(best) = self.best_split(&rows) else {
            return at;
        };
        let (left, right): (Vec<usize>, Vec<usize>) =
            rows.into_iter().partition(|&r| self.x.get(r, best.feature) <= best.threshold);
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.nodes[at] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: r,
        };
        at
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let m = self.x.cols();
        if self.max_features >= m {
            return (0..m).collect();
        }
        let mut f = index::sample(&mut self.rng, m, self.max_features).into_vec();
        f.sort_unstable();
        f
    }

    /// Exhaustive search over features and midpoints between consecutive
    /// distinct values. Minimizing the children's summed squared error is
    /// the same as maximizing `S_l^2 / n_l + S_r^2 / n_r`. Only a strictly
    /// better score replaces the incumbent, so the lowest feature index and
    /// then the lowest threshold win ties.
    fn best_split(&mut self, rows: &[usize]) -> Option<BestSplit> {
        let total: f64 = rows.iter().map(|&r| self.y[r]).sum();
        let n = rows.len() as f64;
        let mut best: Option<BestSplit> = None;
        let mut sorted = rows.to_vec();
        for f in self.candidate_features() {
            sorted.sort_by(|&a, &b| self.x.get(a, f).total_cmp(&self.x.get(b, f)));
            let mut left_sum = 0.0;
            for k in 0..sorted.len() - 1 {
                left_sum += self.y[sorted[k]];
                let (lo, hi) = (self.x.get(sorted[k], f), self.x.get(sorted[k + 1], f));
                if lo == hi {
                    continue;
                }
                let nl = (k + 1) as f64;
                let right_sum = total - left_sum;
                let score = left_sum * left_sum / nl + right_sum * right_sum / (n - nl);
                if best.as_ref().is_none_or(|b| score > b.score) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    // adjacent floats: the midpoint can round up to `hi`
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        score,
                    });
                }
            }
        }
        best
    }
}

fn grow_tree(x: &Matrix, y: &[f64], params: &ForestParams, k: usize) -> RegressionTree {
    let mut rng = ChaCha8Rng::seed_from_u64(tree_seed(params.seed, k as u64));
    let n = x.rows();
    let rows: Vec<usize> = if params.bootstrap {
        (0..n).map(|_| rng.random_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    let mut grower = Grower {
        x,
        y,
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
        max_features: params.max_features.unwrap_or(x.cols()),
        rng,
        nodes: Vec::new(),
    };
    grower.grow(rows, 0);
    RegressionTree { nodes: grower.nodes }
}

/// Grows `params.n_trees` trees in parallel. Results do not depend on the
/// number of worker threads.
pub fn fit_forest(x: &Matrix, y: &[f64], labels: &[String], params: &ForestParams) -> Result<ForestModel, ModelError> {
    check_training_data(x, y, labels, 2)?;
    if params.n_trees == 0 {
        return Err(ModelError::InvalidParams("n_trees must be >= 1".into()));
    }
    if params.min_samples_split < 2 {
        return Err(ModelError::InvalidParams("min_samples_split must be >= 2".into()));
    }
    if params.max_features == Some(0) {
        return Err(ModelError::InvalidParams("max_features must be >= 1".into()));
    }
    let trees: Vec<RegressionTree> = (0..params.n_trees)
        .into_par_iter()
        .map(|k| grow_tree(x, y, params, k))
        .collect();
    Ok(ForestModel {
        trees,
        n_trees: params.n_trees,
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
        bootstrap: params.bootstrap,
        max_features: params.max_features,
        seed: params.seed,
        feature_labels: labels.to_vec(),
    })
}
