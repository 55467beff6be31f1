//! Multinomial logistic regression fitted by batch gradient descent.

use crate::data::{ClassDistribution, LabeledSet};
use crate::error::Result;

use super::canonical_order;

/// Softmax regression over the classes present in training. Covariates are
/// standardised with training statistics; absent classes get probability zero.
#[derive(Debug, Clone)]
pub struct LogisticModel {
    shift: Vec<f64>,
    scale: Vec<f64>,
    /// Present classes and their weights `[bias, w_1, .., w_d]`.
    weights: Vec<(usize, Vec<f64>)>,
    n_classes: usize,
}

impl LogisticModel {
    pub fn fit(data: &LabeledSet, max_iter: usize, step: f64, l2: f64) -> Self {
        let d = data.dim();
        let n = data.len() as f64;
        let order = canonical_order(data);
        let mut shift = vec![0.0; d];
        for &i in &order {
            for (s, x) in shift.iter_mut().zip(data.point(i)) {
                *s += x / n;
            }
        }
        let mut scale = vec![0.0; d];
        for &i in &order {
            for j in 0..d {
                scale[j] += (data.point(i)[j] - shift[j]).powi(2) / n;
            }
        }
        for s in &mut scale {
            *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
        }
        let rows: Vec<(Vec<f64>, usize)> = order
            .iter()
            .map(|&i| {
                let mut z = Vec::with_capacity(d + 1);
                z.push(1.0);
                z.extend(
                    data.point(i)
                        .iter()
                        .zip(shift.iter().zip(&scale))
                        .map(|(x, (m, s))| (x - m) / s),
                );
                (z, data.label(i))
            })
            .collect();
        let counts = data.class_counts();
        let present: Vec<usize> = (0..data.n_classes()).filter(|&c| counts[c] > 0).collect();
        let mut w = vec![vec![0.0; d + 1]; present.len()];
        let mut grad = vec![vec![0.0; d + 1]; present.len()];
        let mut probs = vec![0.0; present.len()];
        for _ in 0..max_iter {
            grad.iter_mut().for_each(|g| g.iter_mut().for_each(|v| *v = 0.0));
            for (z, y) in &rows {
                softmax_into(&w, z, &mut probs);
                for (c, &class) in present.iter().enumerate() {
                    let err = probs[c] - if class == *y { 1.0 } else { 0.0 };
                    for (g, zj) in grad[c].iter_mut().zip(z) {
                        *g += err * zj / n;
                    }
                }
            }
            for (wc, gc) in w.iter_mut().zip(&grad) {
                for j in 0..=d {
                    let penalty = if j == 0 { 0.0 } else { l2 * wc[j] };
                    wc[j] -= step * (gc[j] + penalty);
                }
            }
        }
        Self {
            shift,
            scale,
            weights: present.into_iter().zip(w).collect(),
            n_classes: data.n_classes(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<ClassDistribution> {
        let mut z = Vec::with_capacity(x.len() + 1);
        z.push(1.0);
        z.extend(
            x.iter()
                .zip(self.shift.iter().zip(&self.scale))
                .map(|(v, (m, s))| (v - m) / s),
        );
        let mut scores = vec![None; self.n_classes];
        for (class, w) in &self.weights {
            scores[*class] = Some(w.iter().zip(&z).map(|(a, b)| a * b).sum());
        }
        ClassDistribution::from_log_scores(&scores)
    }
}

fn softmax_into(w: &[Vec<f64>], z: &[f64], out: &mut [f64]) {
    let mut max = f64::NEG_INFINITY;
    for (o, wc) in out.iter_mut().zip(w) {
        *o = wc.iter().zip(z).map(|(a, b)| a * b).sum();
        max = max.max(*o);
    }
    let mut total = 0.0;
    for o in out.iter_mut() {
        *o = (*o - max).exp();
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
}
