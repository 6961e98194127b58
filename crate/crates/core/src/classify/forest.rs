//! Bagged, depth-limited Gini decision trees.
//!
//! Candidate thresholds come from a per-fit binning of each feature: every
//! distinct value when a column has at most [`MAX_BINS`] of them (so splits
//! are exact), otherwise quantile cut points. Each tree is grown on a
//! bootstrap sample with its own seed, so trees can be built in parallel and
//! the ensemble is identical regardless of scheduling.

use ndarray::ArrayView2;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

pub const MAX_BINS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Features examined per split; `None` means `⌈√d⌉`.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    /// Smallest number of distinct training rows in a leaf.
    pub min_samples_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 100, max_depth: 12, max_features: None, min_samples_split: 2, min_samples_leaf: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub enum Node<T> {
    Split { feature: usize, threshold: T, left: usize, right: usize },
    Leaf { vote: u8 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct Tree<T> {
    pub nodes: Vec<Node<T>>,
}

impl<T: Scalar> Tree<T> {
    pub fn vote(&self, row: impl Fn(usize) -> T) -> u8 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { vote } => return *vote,
                Node::Split { feature, threshold, left, right } => {
                    at = if row(*feature) <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go<T>(nodes: &[Node<T>], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct ForestModel<T> {
    pub trees: Vec<Tree<T>>,
}

impl<T: Scalar> ForestModel<T> {
    /// Fraction of trees voting fraud.
    pub fn predict_proba(&self, x: ArrayView2<T>) -> Vec<T> {
        let n_trees = T::of_usize(self.trees.len());
        x.rows()
            .into_iter()
            .map(|r| {
                let votes: usize = self.trees.iter().map(|t| t.vote(|j| r[j]) as usize).sum();
                T::of_usize(votes) / n_trees
            })
            .collect()
    }
}

/// Per-feature bin codes and the cut value closing each bin.
struct Binned<T> {
    /// Column-major bin codes.
    codes: Vec<Vec<u8>>,
    /// `cuts[j][b]`: values `<= cuts[j][b]` fall in bins `0..=b`.
    cuts: Vec<Vec<T>>,
}

fn bin_features<T: Scalar>(x: ArrayView2<T>) -> Binned<T> {
    let mut codes = Vec::with_capacity(x.ncols());
    let mut cuts = Vec::with_capacity(x.ncols());
    for col in x.columns() {
        let mut sorted: Vec<T> = col.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite features"));
        let mut uniq = sorted.clone();
        uniq.dedup();
        let c: Vec<T> = if uniq.len() <= MAX_BINS {
            uniq.windows(2).map(|w| (w[0] + w[1]) / T::of(2.0)).collect()
        } else {
            let mut q: Vec<T> = (1..MAX_BINS)
                .map(|b| sorted[(b * sorted.len()) / MAX_BINS])
                .collect();
            q.dedup();
            if q.last() == uniq.last() {
                q.pop();
            }
            q
        };
        codes.push(col.iter().map(|v| c.partition_point(|cut| cut < v) as u8).collect());
        cuts.push(c);
    }
    Binned { codes, cuts }
}

struct Grower<'a, T> {
    params: &'a ForestParams,
    binned: &'a Binned<T>,
    y: &'a [u8],
    class_weight: [f64; 2],
    mtry: usize,
}

struct Frame {
    node: usize,
    samples: Vec<(u32, f64)>,
    depth: usize,
}

impl<T: Scalar> Grower<'_, T> {
    fn grow(&self, seed: u64) -> Tree<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.y.len();
        let mut counts = vec![0u32; n];
        for _ in 0..n {
            counts[rng.random_range(0..n)] += 1;
        }
        let samples: Vec<(u32, f64)> = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i as u32, c as f64 * self.class_weight[self.y[i] as usize]))
            .collect();
        let mut nodes = vec![Node::Leaf { vote: 0 }];
        let mut stack = vec![Frame { node: 0, samples, depth: 0 }];
        let d = self.binned.codes.len();
        let mut hist = vec![[0f64; 3]; MAX_BINS];
        while let Some(Frame { node, samples, depth }) = stack.pop() {
            let mut tot = [0f64; 2];
            for &(i, w) in &samples {
                tot[self.y[i as usize] as usize] += w;
            }
            let vote = u8::from(tot[1] >= tot[0]);
            let weight = tot[0] + tot[1];
            if depth >= self.params.max_depth
                || tot[0] == 0.0
                || tot[1] == 0.0
                || samples.len() < self.params.min_samples_split
            {
                nodes[node] = Node::Leaf { vote };
                continue;
            }
            // Maximizing Σ_child (w0² + w1²) / w_child minimizes weighted Gini.
            let parent_score = (tot[0] * tot[0] + tot[1] * tot[1]) / weight;
            let n_rows = samples.len() as f64;
            let min_leaf = self.params.min_samples_leaf as f64;
            let mut best: Option<(f64, usize, usize)> = None;
            for j in sample(&mut rng, d, self.mtry.min(d)).into_iter() {
                let n_bins = self.binned.cuts[j].len() + 1;
                if n_bins < 2 {
                    continue;
                }
                let codes = &self.binned.codes[j];
                for h in hist[..n_bins].iter_mut() {
                    *h = [0.0; 3];
                }
                for &(i, w) in &samples {
                    let h = &mut hist[codes[i as usize] as usize];
                    h[self.y[i as usize] as usize] += w;
                    h[2] += 1.0;
                }
                let mut left = [0f64; 3];
                for b in 0..n_bins - 1 {
                    left[0] += hist[b][0];
                    left[1] += hist[b][1];
                    left[2] += hist[b][2];
                    let lw = left[0] + left[1];
                    let rw = weight - lw;
                    if lw <= 0.0 || rw <= 0.0 || left[2] < min_leaf || n_rows - left[2] < min_leaf {
                        continue;
                    }
                    let r0 = tot[0] - left[0];
                    let r1 = tot[1] - left[1];
                    let score = (left[0] * left[0] + left[1] * left[1]) / lw + (r0 * r0 + r1 * r1) / rw;
                    if score > parent_score + 1e-12 && best.is_none_or(|(s, _, _)| score > s) {
                        best = Some((score, j, b));
                    }
                }
            }
            let Some((_, feature, bin)) = best else {
                nodes[node] = Node::Leaf { vote };
                continue;
            };
            let codes = &self.binned.codes[feature];
            let (l, r): (Vec<_>, Vec<_>) = samples.into_iter().partition(|&(i, _)| codes[i as usize] as usize <= bin);
            let left = nodes.len();
            nodes.push(Node::Leaf { vote: 0 });
            nodes.push(Node::Leaf { vote: 0 });
            nodes[node] =
                Node::Split { feature, threshold: self.binned.cuts[feature][bin], left, right: left + 1 };
            stack.push(Frame { node: left + 1, samples: r, depth: depth + 1 });
            stack.push(Frame { node: left, samples: l, depth: depth + 1 });
        }
        Tree { nodes }
    }
}

/// Seed of tree `t` in a forest rooted at `seed`.
pub fn tree_seed(seed: u64, t: usize) -> u64 {
    crate::split_seed(seed, t as u64)
}

pub fn fit<T: Scalar>(
    params: &ForestParams,
    x: ArrayView2<T>,
    y: &[u8],
    class_weight: [f64; 2],
    seed: u64,
) -> ForestModel<T> {
    let binned = bin_features(x);
    let d = x.ncols();
    let mtry = params.max_features.unwrap_or_else(|| (d as f64).sqrt().ceil() as usize).clamp(1, d.max(1));
    let grower = Grower { params, binned: &binned, y, class_weight, mtry };
    let trees = (0..params.n_trees).into_par_iter().map(|t| grower.grow(tree_seed(seed, t))).collect();
    ForestModel { trees }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn binning_is_exact_for_few_values() {
        let x = array![[1.0], [3.0], [3.0], [7.0]];
        let b = bin_features(x.view());
        assert_eq!(b.cuts[0], vec![2.0, 5.0]);
        assert_eq!(b.codes[0], vec![0, 1, 1, 2]);
    }

    #[test]
    fn binning_caps_bin_count() {
        let x = ndarray::Array2::from_shape_fn((5000, 1), |(i, _)| i as f64 * 0.5);
        let b = bin_features(x.view());
        assert!(b.cuts[0].len() < MAX_BINS);
        assert!(b.codes[0].windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn stump_splits_separable_data() {
        let x = array![[0.0], [0.1], [0.2], [0.9], [1.0], [1.1]];
        let y = [0, 0, 0, 1, 1, 1];
        let params = ForestParams { n_trees: 1, max_depth: 1, ..Default::default() };
        let f = fit(&params, x.view(), &y, [1.0, 1.0], 3);
        assert!(f.trees[0].depth() <= 1);
        let p = f.predict_proba(x.view());
        assert!(p.iter().all(|&v| v == 0.0 || v == 1.0));
    }
}
