//! Gaussian generative classifiers: LDA, QDA, Gaussian naive Bayes and the
//! unit-variance mean classifier.

use crate::data::{ClassDistribution, LabeledSet};
use crate::error::Result;
use crate::linalg::Gaussian;

use super::canonical_order;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceKind {
    /// One within-class covariance shared by every class (LDA).
    Pooled,
    /// A full covariance per class (QDA).
    PerClass,
    /// A diagonal covariance per class (naive Bayes).
    Diagonal,
}

/// Per-class log prior and class-conditional density; `None` for absent classes.
#[derive(Debug, Clone)]
pub struct GaussianModel {
    classes: Vec<Option<(f64, Gaussian)>>,
}

struct ClassStats {
    count: usize,
    mean: Vec<f64>,
    /// Scatter matrix Σ (x - mean)(x - mean)^T, row-major.
    scatter: Vec<f64>,
}

fn class_stats(data: &LabeledSet) -> Vec<ClassStats> {
    let d = data.dim();
    let order = canonical_order(data);
    let mut stats: Vec<ClassStats> = (0..data.n_classes())
        .map(|_| ClassStats {
            count: 0,
            mean: vec![0.0; d],
            scatter: vec![0.0; d * d],
        })
        .collect();
    for &i in &order {
        let s = &mut stats[data.label(i)];
        s.count += 1;
        for (m, x) in s.mean.iter_mut().zip(data.point(i)) {
            *m += x;
        }
    }
    for s in &mut stats {
        if s.count > 0 {
            for m in &mut s.mean {
                *m /= s.count as f64;
            }
        }
    }
    for &i in &order {
        let s = &mut stats[data.label(i)];
        let x = data.point(i);
        for r in 0..d {
            let dr = x[r] - s.mean[r];
            for c in 0..d {
                s.scatter[r * d + c] += dr * (x[c] - s.mean[c]);
            }
        }
    }
    stats
}

impl GaussianModel {
    /// Fits class means and covariances with the empirical class prior.
    pub fn fit(data: &LabeledSet, kind: CovarianceKind, var_floor: f64) -> Result<Self> {
        let d = data.dim();
        let n = data.len() as f64;
        let stats = class_stats(data);
        let present = stats.iter().filter(|s| s.count > 0).count();
        let pooled = (kind == CovarianceKind::Pooled).then(|| {
            let denom = (data.len().saturating_sub(present)).max(1) as f64;
            let mut cov = vec![0.0; d * d];
            for s in &stats {
                for (c, v) in cov.iter_mut().zip(&s.scatter) {
                    *c += v;
                }
            }
            cov.iter_mut().for_each(|c| *c /= denom);
            cov
        });
        let classes = stats
            .into_iter()
            .map(|s| {
                if s.count == 0 {
                    return None;
                }
                let cov = match kind {
                    CovarianceKind::Pooled => pooled.clone().unwrap_or_default(),
                    CovarianceKind::PerClass | CovarianceKind::Diagonal => {
                        let denom = (s.count.saturating_sub(1)).max(1) as f64;
                        let mut cov: Vec<f64> = s.scatter.iter().map(|v| v / denom).collect();
                        if kind == CovarianceKind::Diagonal {
                            for r in 0..d {
                                for c in 0..d {
                                    if r != c {
                                        cov[r * d + c] = 0.0;
                                    }
                                }
                            }
                        }
                        cov
                    }
                };
                let log_prior = (s.count as f64 / n).ln();
                Some((log_prior, Gaussian::new(s.mean, cov, var_floor)))
            })
            .collect();
        Ok(Self { classes })
    }

    /// Fits class means only; covariance is the identity and the prior is
    /// fixed (uniform over all classes when `prior` is `None`).
    pub fn fit_unit(data: &LabeledSet, prior: Option<&[f64]>) -> Result<Self> {
        let d = data.dim();
        let k = data.n_classes();
        let mut identity = vec![0.0; d * d];
        for i in 0..d {
            identity[i * d + i] = 1.0;
        }
        let classes = class_stats(data)
            .into_iter()
            .enumerate()
            .map(|(c, s)| {
                (s.count > 0).then(|| {
                    let log_prior = prior.map_or(-(k as f64).ln(), |p| p[c].ln());
                    (log_prior, Gaussian::new(s.mean, identity.clone(), 0.0))
                })
            })
            .collect();
        Ok(Self { classes })
    }

    /// Fitted mean of `class`, if that class was present.
    pub fn class_mean(&self, class: usize) -> Option<&[f64]> {
        self.classes[class].as_ref().map(|(_, g)| g.mean())
    }

    pub fn predict(&self, x: &[f64]) -> Result<ClassDistribution> {
        let scores: Vec<Option<f64>> = self
            .classes
            .iter()
            .map(|c| c.as_ref().map(|(lp, g)| lp + g.log_pdf(x)))
            .collect();
        ClassDistribution::from_log_scores(&scores)
    }
}
