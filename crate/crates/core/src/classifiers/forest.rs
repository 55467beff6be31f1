//! A small random forest: bootstrap samples, CART trees grown on Gini
//! impurity, `floor(sqrt(d))` candidate covariates per split.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{ClassDistribution, LabeledSet};
use crate::error::Result;

use super::canonical_order;

#[derive(Debug, Clone)]
enum Node {
    Leaf(Vec<f64>),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    fn leaf_for(&self, x: &[f64]) -> &[f64] {
        match self {
            Node::Leaf(p) => p,
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] <= *threshold {
                    left.leaf_for(x)
                } else {
                    right.leaf_for(x)
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ForestModel {
    trees: Vec<Node>,
    n_classes: usize,
}

struct Grower<'a> {
    points: Vec<&'a [f64]>,
    labels: Vec<usize>,
    n_classes: usize,
    max_depth: usize,
    mtry: usize,
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

impl Grower<'_> {
    fn leaf(&self, idx: &[usize]) -> Node {
        let mut dist = vec![0.0; self.n_classes];
        for &i in idx {
            dist[self.labels[i]] += 1.0;
        }
        let n = idx.len() as f64;
        dist.iter_mut().for_each(|v| *v /= n);
        Node::Leaf(dist)
    }

    fn grow<R: Rng>(&self, idx: &mut [usize], depth: usize, rng: &mut R) -> Node {
        let mut counts = vec![0usize; self.n_classes];
        for &i in idx.iter() {
            counts[self.labels[i]] += 1;
        }
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.max_depth || idx.len() < 2 {
            return self.leaf(idx);
        }
        let parent = gini(&counts, idx.len());
        let d = self.points[0].len();
        let features = sample(rng, d, self.mtry);
        // (impurity decrease, feature, threshold)
        let mut best: Option<(f64, usize, f64)> = None;
        for feature in features.iter() {
            idx.sort_by(|&a, &b| {
                self.points[a][feature]
                    .total_cmp(&self.points[b][feature])
                    .then(self.labels[a].cmp(&self.labels[b]))
            });
            let mut left = vec![0usize; self.n_classes];
            let mut right = counts.clone();
            for split in 1..idx.len() {
                let moved = self.labels[idx[split - 1]];
                left[moved] += 1;
                right[moved] -= 1;
                let lo = self.points[idx[split - 1]][feature];
                let hi = self.points[idx[split]][feature];
                if lo == hi {
                    continue;
                }
                let n = idx.len() as f64;
                let child = (split as f64 / n) * gini(&left, split)
                    + ((idx.len() - split) as f64 / n) * gini(&right, idx.len() - split);
                let gain = parent - child;
                if gain > 1e-12 && best.is_none_or(|b| gain > b.0) {
                    best = Some((gain, feature, 0.5 * (lo + hi)));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            return self.leaf(idx);
        };
        let (mut l, mut r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.points[i][feature] <= threshold);
        Node::Split {
            feature,
            threshold,
            left: Box::new(self.grow(&mut l, depth + 1, rng)),
            right: Box::new(self.grow(&mut r, depth + 1, rng)),
        }
    }
}

impl ForestModel {
    pub fn fit(data: &LabeledSet, trees: usize, max_depth: usize, seed: u64) -> Self {
        // Bootstrap draws index the canonical order, not the caller's order.
        let order = canonical_order(data);
        let d = data.dim();
        let grower = Grower {
            points: order.iter().map(|&i| data.point(i)).collect(),
            labels: order.iter().map(|&i| data.label(i)).collect(),
            n_classes: data.n_classes(),
            max_depth,
            mtry: ((d as f64).sqrt().floor() as usize).clamp(1, d),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = data.len();
        let trees = (0..trees)
            .map(|_| {
                let mut idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                grower.grow(&mut idx, 0, &mut rng)
            })
            .collect();
        Self {
            trees,
            n_classes: data.n_classes(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<ClassDistribution> {
        let mut dist = vec![0.0; self.n_classes];
        for tree in &self.trees {
            for (d, p) in dist.iter_mut().zip(tree.leaf_for(x)) {
                *d += p;
            }
        }
        ClassDistribution::from_scores(&dist)
    }
}
