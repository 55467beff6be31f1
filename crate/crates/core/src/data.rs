//! Examples, labelled sets, pools and class-probability vectors.
//!
//! Class labels are zero-based indices `0..n_classes` throughout the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A covariate vector with an optional class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub x: Vec<f64>,
    pub y: Option<usize>,
}

impl Example {
    pub fn labelled(x: Vec<f64>, y: usize) -> Self {
        Self { x, y: Some(y) }
    }

    pub fn unlabelled(x: Vec<f64>) -> Self {
        Self { x, y: None }
    }
}

/// A fully labelled dataset over `n_classes` classes.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    points: Vec<Vec<f64>>,
    labels: Vec<usize>,
    n_classes: usize,
    dim: usize,
}

impl LabeledSet {
    /// Builds a labelled set, checking dimensions and label ranges.
    ///
    /// An empty set is allowed; its dimension is `dim`.
    pub fn new(points: Vec<Vec<f64>>, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        Self::with_dim(points, labels, n_classes, dim)
    }

    pub fn with_dim(
        points: Vec<Vec<f64>>,
        labels: Vec<usize>,
        n_classes: usize,
        dim: usize,
    ) -> Result<Self> {
        if n_classes < 2 {
            return Err(Error::BadSpec(format!(
                "need at least two classes, got {n_classes}"
            )));
        }
        if points.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: points.len(),
                right: labels.len(),
            });
        }
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
        if let Some(&label) = labels.iter().find(|&&y| y >= n_classes) {
            return Err(Error::LabelOutOfRange { label, n_classes });
        }
        Ok(Self {
            points,
            labels,
            n_classes,
            dim,
        })
    }

    pub fn from_examples(examples: &[Example], n_classes: usize) -> Result<Self> {
        let mut points = Vec::with_capacity(examples.len());
        let mut labels = Vec::with_capacity(examples.len());
        for e in examples {
            let y = e
                .y
                .ok_or_else(|| Error::BadSpec("labelled set needs every label".into()))?;
            points.push(e.x.clone());
            labels.push(y);
        }
        Self::new(points, labels, n_classes)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], usize)> + '_ {
        self.points
            .iter()
            .zip(&self.labels)
            .map(|(p, &y)| (p.as_slice(), y))
    }

    /// Number of examples per class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// A copy of this set with one more example appended.
    pub fn with_example(&self, x: &[f64], y: usize) -> Result<Self> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        if y >= self.n_classes {
            return Err(Error::LabelOutOfRange {
                label: y,
                n_classes: self.n_classes,
            });
        }
        let mut out = self.clone();
        out.points.push(x.to_vec());
        out.labels.push(y);
        Ok(out)
    }

    pub fn push(&mut self, x: Vec<f64>, y: usize) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        if y >= self.n_classes {
            return Err(Error::LabelOutOfRange {
                label: y,
                n_classes: self.n_classes,
            });
        }
        self.points.push(x);
        self.labels.push(y);
        Ok(())
    }

    /// The examples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            n_classes: self.n_classes,
            dim: self.dim,
        }
    }
}

/// Unlabelled candidates with stable ids. The true labels are kept for the
/// oracle and never shown to selection strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct Pool {
    ids: Vec<usize>,
    points: Vec<Vec<f64>>,
    hidden_labels: Vec<usize>,
    dim: usize,
}

impl Pool {
    pub fn new(ids: Vec<usize>, points: Vec<Vec<f64>>, hidden_labels: Vec<usize>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        Self::with_dim(ids, points, hidden_labels, dim)
    }

    pub fn with_dim(
        ids: Vec<usize>,
        points: Vec<Vec<f64>>,
        hidden_labels: Vec<usize>,
        dim: usize,
    ) -> Result<Self> {
        if ids.len() != points.len() || ids.len() != hidden_labels.len() {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: points.len().min(hidden_labels.len()),
            });
        }
        let mut seen = std::collections::HashSet::with_capacity(ids.len());
        if let Some(dup) = ids.iter().find(|id| !seen.insert(**id)) {
            return Err(Error::BadSpec(format!("duplicate pool id {dup}")));
        }
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
        Ok(Self {
            ids,
            points,
            hidden_labels,
            dim,
        })
    }

    /// A pool of unlabelled points with ids `0..n`. Oracle labels are set to 0.
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        Self::new((0..n).collect(), points, vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Position of `id` in this pool.
    pub fn position(&self, id: usize) -> Option<usize> {
        self.ids.iter().position(|&i| i == id)
    }

    pub fn point_of(&self, id: usize) -> Option<&[f64]> {
        self.position(id).map(|i| self.points[i].as_slice())
    }

    /// The perfect oracle: reveals the label of `id`.
    pub fn oracle_label(&self, id: usize) -> Option<usize> {
        self.position(id).map(|i| self.hidden_labels[i])
    }

    /// The sub-pool made of the given positions, in that order.
    pub fn select_positions(&self, positions: &[usize]) -> Self {
        Self {
            ids: positions.iter().map(|&i| self.ids[i]).collect(),
            points: positions.iter().map(|&i| self.points[i].clone()).collect(),
            hidden_labels: positions.iter().map(|&i| self.hidden_labels[i]).collect(),
            dim: self.dim,
        }
    }

    /// Removes `id` and returns its point and oracle label.
    pub fn take(&mut self, id: usize) -> Option<(Vec<f64>, usize)> {
        let i = self.position(id)?;
        self.ids.remove(i);
        let y = self.hidden_labels.remove(i);
        Some((self.points.remove(i), y))
    }

    /// The pool revealed as a labelled set (used for bookkeeping, never by strategies).
    pub fn reveal(&self, n_classes: usize) -> Result<LabeledSet> {
        LabeledSet::with_dim(
            self.points.clone(),
            self.hidden_labels.clone(),
            n_classes,
            self.dim,
        )
    }
}

const SUM_TOLERANCE: f64 = 1e-9;

/// A probability vector over classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution(Vec<f64>);

impl ClassDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "need at least two classes, got {}",
                probs.len()
            )));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidDistribution(format!(
                "entries must lie in [0, 1]: {probs:?}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}"
            )));
        }
        Ok(Self(probs))
    }

    /// Normalizes nonnegative scores into a distribution.
    pub fn from_scores(scores: &[f64]) -> Result<Self> {
        if scores.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "scores must be finite and nonnegative: {scores:?}"
            )));
        }
        let total: f64 = scores.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("scores sum to zero".into()));
        }
        Self::new(scores.iter().map(|s| s / total).collect())
    }

    /// Softmax of log-scores; `None` entries get probability zero.
    pub fn from_log_scores(log_scores: &[Option<f64>]) -> Result<Self> {
        let max = log_scores
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::InvalidDistribution(
                "no finite log-score".into(),
            ));
        }
        let weights: Vec<f64> = log_scores
            .iter()
            .map(|s| s.map_or(0.0, |s| (s - max).exp()))
            .collect();
        Self::from_scores(&weights)
    }

    /// Uniform distribution over `k` classes.
    pub fn uniform(k: usize) -> Self {
        Self(vec![1.0 / k as f64; k])
    }

    /// Puts `1 - (k-1)·eps` on `class` and `eps` elsewhere.
    pub fn near_certain(k: usize, class: usize, eps: f64) -> Self {
        let mut probs = vec![eps; k];
        probs[class] = 1.0 - (k - 1) as f64 * eps;
        Self(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn n_classes(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, class: usize) -> f64 {
        self.0[class]
    }

    /// The allocated class: argmax, ties to the lowest index.
    pub fn allocate(&self) -> usize {
        let mut best = 0;
        for (j, &p) in self.0.iter().enumerate().skip(1) {
            if p > self.0[best] {
                best = j;
            }
        }
        best
    }
}

/// Empirical class frequencies; absent classes get zero.
pub fn class_prior(data: &LabeledSet) -> Result<ClassDistribution> {
    if data.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = data.len() as f64;
    ClassDistribution::new(
        data.class_counts()
            .into_iter()
            .map(|c| c as f64 / n)
            .collect(),
    )
}
