//! Random forest of CART trees grown on bootstrap resamples with Gini
//! impurity and per-split feature subsampling.
//!
//! Trees are grown in parallel; each tree's randomness comes from a seed
//! derived from the forest seed and the tree index, and each node's feature
//! draw from the tree seed and the node's position in the tree. A model is
//! therefore a pure function of data, hyperparameters and seed, and a tree
//! grown with a larger depth limit refines the one grown with a smaller one.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_training_set, LearnError, ProbEstimate};
use crate::dataset::Label;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features drawn per split; `None` means `ceil(sqrt(width))`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 100, max_depth: 12, min_samples_leaf: 2, max_features: None, bootstrap: true }
    }
}

impl ForestParams {
    fn validate(&self) -> Result<(), LearnError> {
        if self.n_trees == 0 {
            return Err(LearnError::InvalidParams("n_trees must be positive".into()));
        }
        if self.max_depth > 60 {
            return Err(LearnError::InvalidParams("max_depth must be at most 60".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(LearnError::InvalidParams("min_samples_leaf must be positive".into()));
        }
        if self.max_features == Some(0) {
            return Err(LearnError::InvalidParams("max_features must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    /// Class histogram `[untrustworthy, trustworthy]` of the training rows
    /// that reached this leaf.
    Leaf { counts: [u32; 2] },
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_counts(&self, x: &[f64]) -> [u32; 2] {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { counts } => return *counts,
                Node::Split { feature, threshold, left, right } => {
                    idx = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Share of trustworthy rows in the leaf `x` falls into.
    pub fn trust_fraction(&self, x: &[f64]) -> f64 {
        let [neg, pos] = self.leaf_counts(x);
        f64::from(pos) / f64::from(neg + pos)
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], idx: usize) -> usize {
            match &nodes[idx] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub params: ForestParams,
    pub seed: u64,
    pub n_features: usize,
    pub trees: Vec<Tree>,
}

impl ForestModel {
    /// Mean over trees of the leaf's trustworthy fraction.
    pub fn proba(&self, x: &[f64]) -> ProbEstimate {
        let total: f64 = self.trees.iter().map(|t| t.trust_fraction(x)).sum();
        ProbEstimate::new(total / self.trees.len() as f64)
    }
}

pub fn train_forest<R: AsRef<[f64]> + Sync>(
    rows: &[R],
    labels: &[Label],
    params: &ForestParams,
    rng_seed: u64,
) -> Result<ForestModel, LearnError> {
    params.validate()?;
    let width = check_training_set(rows, labels)?;
    let max_features =
        params.max_features.unwrap_or_else(|| (width as f64).sqrt().ceil() as usize).clamp(1, width.max(1));
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let tree_seed = seed::mix(rng_seed, t as u64);
            let sample_rows: Vec<usize> = if params.bootstrap {
                let mut rng = seed::rng(tree_seed, 0);
                (0..rows.len()).map(|_| rng.random_range(0..rows.len())).collect()
            } else {
                (0..rows.len()).collect()
            };
            let mut grower = Grower { rows, labels, params, max_features, width, tree_seed, nodes: Vec::new() };
            grower.grow(sample_rows, 0, 1);
            Tree { nodes: grower.nodes }
        })
        .collect();
    Ok(ForestModel { params: params.clone(), seed: rng_seed, n_features: width, trees })
}

struct Grower<'a, R> {
    rows: &'a [R],
    labels: &'a [Label],
    params: &'a ForestParams,
    max_features: usize,
    width: usize,
    tree_seed: u64,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn gini(counts: [u32; 2]) -> f64 {
    let n = f64::from(counts[0] + counts[1]);
    if n == 0.0 {
        return 0.0;
    }
    let p = f64::from(counts[1]) / n;
    2.0 * p * (1.0 - p)
}

impl<R: AsRef<[f64]>> Grower<'_, R> {
    fn histogram(&self, members: &[usize]) -> [u32; 2] {
        let mut counts = [0u32; 2];
        for &i in members {
            counts[self.labels[i].as_index()] += 1;
        }
        counts
    }

    /// Grows the subtree for `members`; returns its node index. `path` is the
    /// heap-style position (root 1, children 2p and 2p+1).
    fn grow(&mut self, members: Vec<usize>, depth: usize, path: u64) -> usize {
        let counts = self.histogram(&members);
        let idx = self.nodes.len();
        self.nodes.push(Node::Leaf { counts });
        let pure = counts[0] == 0 || counts[1] == 0;
        if pure || depth >= self.params.max_depth || members.len() < 2 * self.params.min_samples_leaf {
            return idx;
        }
        let Some(best) = self.best_split(&members, counts, path) else {
            return idx;
        };
        let (left, right): (Vec<usize>, Vec<usize>) =
            members.into_iter().partition(|&i| self.rows[i].as_ref()[best.feature] <= best.threshold);
        let left_idx = self.grow(left, depth + 1, path * 2);
        let right_idx = self.grow(right, depth + 1, path * 2 + 1);
        self.nodes[idx] =
            Node::Split { feature: best.feature, threshold: best.threshold, left: left_idx, right: right_idx };
        idx
    }

    /// Highest Gini gain among the sampled features. Ties keep the lowest
    /// feature index, then the lowest threshold.
    fn best_split(&self, members: &[usize], counts: [u32; 2], path: u64) -> Option<BestSplit> {
        let mut rng = seed::rng(self.tree_seed, path);
        let mut features = sample(&mut rng, self.width, self.max_features).into_vec();
        features.sort_unstable();

        let n = members.len();
        let parent = gini(counts);
        let min_leaf = self.params.min_samples_leaf;
        let mut best: Option<BestSplit> = None;
        let mut column: Vec<(f64, usize)> = Vec::with_capacity(n);
        for feature in features {
            column.clear();
            column.extend(members.iter().map(|&i| (self.rows[i].as_ref()[feature], self.labels[i].as_index())));
            column.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = [0u32; 2];
            for k in 0..n - 1 {
                left[column[k].1] += 1;
                let (here, next) = (column[k].0, column[k + 1].0);
                let n_left = k + 1;
                if here == next || n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let right = [counts[0] - left[0], counts[1] - left[1]];
                let weighted = (n_left as f64 * gini(left) + (n - n_left) as f64 * gini(right)) / n as f64;
                let gain = parent - weighted;
                if gain > 1e-12 && best.as_ref().is_none_or(|b| gain > b.gain) {
                    let mut threshold = here + (next - here) / 2.0;
                    if threshold >= next {
                        threshold = here;
                    }
                    best = Some(BestSplit { feature, threshold, gain });
                }
            }
        }
        best
    }
}
