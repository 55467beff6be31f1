//! K-nearest-neighbours with per-covariate scaling.

use crate::data::{ClassDistribution, LabeledSet};
use crate::error::Result;

/// Stores the training data divided by the training standard deviation of
/// each covariate; the same scaling is applied to query points.
#[derive(Debug, Clone)]
pub struct KnnModel {
    scale: Vec<f64>,
    points: Vec<Vec<f64>>,
    labels: Vec<usize>,
    k: usize,
    n_classes: usize,
    smoothing: bool,
}

fn column_sd(data: &LabeledSet, j: usize) -> f64 {
    let n = data.len();
    if n < 2 {
        return 0.0;
    }
    // Summed in sorted order so the result does not depend on row order.
    let mut col: Vec<f64> = data.points().iter().map(|p| p[j]).collect();
    col.sort_by(f64::total_cmp);
    let mean = col.iter().sum::<f64>() / n as f64;
    let ss: f64 = col.iter().map(|v| (v - mean).powi(2)).sum();
    (ss / (n - 1) as f64).sqrt()
}

impl KnnModel {
    pub fn fit(data: &LabeledSet, k: usize, smoothing: bool) -> Self {
        let scale: Vec<f64> = (0..data.dim())
            .map(|j| {
                let sd = column_sd(data, j);
                // Zero-variance covariates are left unscaled.
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        let points = data
            .points()
            .iter()
            .map(|p| p.iter().zip(&scale).map(|(v, s)| v / s).collect())
            .collect();
        Self {
            scale,
            points,
            labels: data.labels().to_vec(),
            k,
            n_classes: data.n_classes(),
            smoothing,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<ClassDistribution> {
        let q: Vec<f64> = x.iter().zip(&self.scale).map(|(v, s)| v / s).collect();
        let mut dist: Vec<(f64, usize)> = self
            .points
            .iter()
            .zip(&self.labels)
            .map(|(p, &y)| (p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum(), y))
            .collect();
        let k = self.k.min(dist.len());
        // Distance ties at the k-th place are broken by class index, which
        // keeps the neighbourhood independent of training order.
        let key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, key);
        }
        let mut counts = vec![0.0; self.n_classes];
        for &(_, y) in &dist[..k] {
            counts[y] += 1.0;
        }
        if self.smoothing {
            let pseudo = 1.0 / self.n_classes as f64;
            counts.iter_mut().for_each(|c| *c += pseudo);
        }
        ClassDistribution::from_scores(&counts)
    }
}
