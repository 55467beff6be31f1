//! Per-example losses and holdout estimates of expected loss.

use serde::{Deserialize, Serialize};

use crate::data::{ClassDistribution, LabeledSet};
use crate::error::{Error, Result};

/// Anything that maps a covariate vector to a class-probability vector.
pub trait ProbabilisticClassifier: Send + Sync {
    fn n_classes(&self) -> usize;
    fn dim(&self) -> usize;
    fn predict_proba(&self, x: &[f64]) -> Result<ClassDistribution>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    ErrorRate,
    LogLoss,
}

pub const DEFAULT_PROB_FLOOR: f64 = 1e-12;

/// Which loss to use, and the probability floor applied by log loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    #[serde(default = "default_floor")]
    pub floor: f64,
}

fn default_floor() -> f64 {
    DEFAULT_PROB_FLOOR
}

impl LossSpec {
    pub fn new(kind: LossKind, floor: f64) -> Result<Self> {
        if !(floor > 0.0 && floor <= 1e-3) {
            return Err(Error::BadSpec(format!(
                "log-loss floor must lie in (0, 1e-3], got {floor}"
            )));
        }
        Ok(Self { kind, floor })
    }

    pub fn error_rate() -> Self {
        Self {
            kind: LossKind::ErrorRate,
            floor: DEFAULT_PROB_FLOOR,
        }
    }

    pub fn log_loss() -> Self {
        Self {
            kind: LossKind::LogLoss,
            floor: DEFAULT_PROB_FLOOR,
        }
    }
}

impl Default for LossSpec {
    fn default() -> Self {
        Self::error_rate()
    }
}

/// Loss of predicting `p_hat` when the label is `y`.
///
/// Log loss is the nonnegative surrogate `-ln max(p_hat[y], floor)`.
pub fn empirical_loss(spec: &LossSpec, y: usize, p_hat: &ClassDistribution) -> f64 {
    match spec.kind {
        LossKind::ErrorRate => {
            if p_hat.allocate() == y {
                0.0
            } else {
                1.0
            }
        }
        LossKind::LogLoss => -p_hat.get(y).max(spec.floor).ln(),
    }
}

/// Mean empirical loss of `model` over a holdout set.
pub fn estimate_expected_loss<M: ProbabilisticClassifier + ?Sized>(
    spec: &LossSpec,
    model: &M,
    test: &LabeledSet,
) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    if test.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: test.dim(),
        });
    }
    let mut total = 0.0;
    for (x, y) in test.iter() {
        total += empirical_loss(spec, y, &model.predict_proba(x)?);
    }
    Ok(total / test.len() as f64)
}
