//! Retrain-based scores: EfeLc, simpleEQ and partitionEQ.
//!
//! Each score is "higher is better" and estimates the negated expected loss of
//! the classifier retrained on the candidate with each possible label,
//! weighted by the estimated class probabilities at the candidate. The loss of
//! the current classifier does not depend on the candidate and is dropped, so
//! rankings match rankings by estimated expected loss reduction.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::classifiers::{train, ClassifierSpec, TrainedModel};
use crate::data::{ClassDistribution, LabeledSet};
use crate::error::{Error, Result};
use crate::loss::{estimate_expected_loss, LossSpec, ProbabilisticClassifier};

use super::uncertainty::least_confidence;

/// A split of a labelled set into three disjoint index lists: `calib` trains
/// the class-probability estimate, `train` the classifier, `eval` the loss.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    pub calib: Vec<usize>,
    pub train: Vec<usize>,
    pub eval: Vec<usize>,
}

impl PartitionPlan {
    /// Checks that the parts are nonempty, disjoint and cover `0..n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for part in [&self.calib, &self.train, &self.eval] {
            if part.is_empty() {
                return Err(Error::BadSpec("partition part is empty".into()));
            }
            for &i in part {
                if i >= n || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::BadSpec(format!(
                        "partition index {i} repeated or out of range"
                    )));
                }
            }
        }
        if seen.iter().all(|&s| s) {
            Ok(())
        } else {
            Err(Error::BadSpec("partition does not cover the data".into()))
        }
    }
}

/// Draws a random three-way partition in near-equal thirds. The split is
/// stratified by class when every class present has at least three members.
pub fn draw_partition<R: Rng + ?Sized>(data: &LabeledSet, rng: &mut R) -> Result<PartitionPlan> {
    if data.len() < 3 {
        return Err(Error::TooFewExamples {
            needed: 3,
            found: data.len(),
        });
    }
    let counts = data.class_counts();
    let stratify = counts.iter().all(|&c| c == 0 || c >= 3);
    let order: Vec<usize> = if stratify {
        let mut order = Vec::with_capacity(data.len());
        for class in 0..data.n_classes() {
            let mut members: Vec<usize> = (0..data.len()).filter(|&i| data.label(i) == class).collect();
            members.shuffle(rng);
            order.extend(members);
        }
        order
    } else {
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(rng);
        order
    };
    let mut parts = [Vec::new(), Vec::new(), Vec::new()];
    for (pos, i) in order.into_iter().enumerate() {
        parts[pos % 3].push(i);
    }
    let [calib, train, eval] = parts;
    Ok(PartitionPlan { calib, train, eval })
}

pub fn draw_partitions<R: Rng + ?Sized>(
    data: &LabeledSet,
    repeats: usize,
    rng: &mut R,
) -> Result<Vec<PartitionPlan>> {
    if repeats == 0 {
        return Err(Error::BadSpec("partition repeats must be at least 1".into()));
    }
    (0..repeats).map(|_| draw_partition(data, rng)).collect()
}

/// `-Σ_j p_j · f(j)` over classes with nonzero weight.
fn weighted_negated<F>(p_hat: &ClassDistribution, mut f: F) -> Result<f64>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut total = 0.0;
    for (j, &p) in p_hat.probs().iter().enumerate() {
        if p > 0.0 {
            total += p * f(j)?;
        }
    }
    Ok(-total)
}

pub(crate) fn efelc_with(
    x: &[f64],
    p_hat: &ClassDistribution,
    base: &ClassifierSpec,
    data: &LabeledSet,
    pool_points: &[Vec<f64>],
) -> Result<f64> {
    weighted_negated(p_hat, |j| {
        let model = train(base, &data.with_example(x, j)?)?;
        let mut lc = 0.0;
        for xi in pool_points {
            lc += least_confidence(&model.predict_proba(xi)?);
        }
        Ok(lc)
    })
}

/// EfeLc: expected total least confidence over the pool after retraining on
/// the candidate, negated. The class weights come from `θ(D)` at `x`.
pub fn efelc_score(
    x: &[f64],
    base: &ClassifierSpec,
    data: &LabeledSet,
    pool_points: &[Vec<f64>],
) -> Result<f64> {
    let current = train(base, data)?;
    efelc_with(x, &current.predict_proba(x)?, base, data, pool_points)
}

pub(crate) fn simple_eq_with(
    x: &[f64],
    p_hat: &ClassDistribution,
    base: &ClassifierSpec,
    data: &LabeledSet,
    loss: &LossSpec,
) -> Result<f64> {
    weighted_negated(p_hat, |j| {
        let model = train(base, &data.with_example(x, j)?)?;
        estimate_expected_loss(loss, &model, data)
    })
}

/// simpleEQ: one labelled set estimates the class probabilities, trains the
/// classifier and measures its (in-sample) loss.
pub fn simple_eq_score(
    x: &[f64],
    base: &ClassifierSpec,
    data: &LabeledSet,
    loss: &LossSpec,
) -> Result<f64> {
    let current = train(base, data)?;
    simple_eq_with(x, &current.predict_proba(x)?, base, data, loss)
}

/// The per-partition pieces that do not depend on the candidate.
pub(crate) struct PreparedPartition {
    prob_model: TrainedModel,
    train: LabeledSet,
    eval: LabeledSet,
}

pub(crate) fn prepare_partitions(
    plans: &[PartitionPlan],
    prob_spec: &ClassifierSpec,
    data: &LabeledSet,
) -> Result<Vec<PreparedPartition>> {
    plans
        .iter()
        .map(|plan| {
            plan.validate(data.len())?;
            Ok(PreparedPartition {
                prob_model: train(prob_spec, &data.subset(&plan.calib))?,
                train: data.subset(&plan.train),
                eval: data.subset(&plan.eval),
            })
        })
        .collect()
}

pub(crate) fn partition_eq_with(
    x: &[f64],
    base: &ClassifierSpec,
    prepared: &[PreparedPartition],
    loss: &LossSpec,
) -> Result<f64> {
    let mut total = 0.0;
    for part in prepared {
        let p_hat = part.prob_model.predict_proba(x)?;
        total += weighted_negated(&p_hat, |j| {
            let model = train(base, &part.train.with_example(x, j)?)?;
            estimate_expected_loss(loss, &model, &part.eval)
        })?;
    }
    Ok(total / prepared.len() as f64)
}

/// partitionEQ over a fixed set of partitions: the mean over partitions of
/// `-Σ_j p_j(x) L(θ(D_T ∪ (x, c_j)); D_E)` with `p` from `θ_prob(D_C)`.
pub fn partition_eq_score_with(
    x: &[f64],
    base: &ClassifierSpec,
    prob_spec: &ClassifierSpec,
    data: &LabeledSet,
    loss: &LossSpec,
    plans: &[PartitionPlan],
) -> Result<f64> {
    if plans.is_empty() {
        return Err(Error::BadSpec("no partitions".into()));
    }
    let prepared = prepare_partitions(plans, prob_spec, data)?;
    partition_eq_with(x, base, &prepared, loss)
}

/// partitionEQ with `repeats` freshly drawn partitions.
pub fn partition_eq_score<R: Rng + ?Sized>(
    x: &[f64],
    base: &ClassifierSpec,
    prob_spec: &ClassifierSpec,
    data: &LabeledSet,
    loss: &LossSpec,
    repeats: usize,
    rng: &mut R,
) -> Result<f64> {
    let plans = draw_partitions(data, repeats, rng)?;
    partition_eq_score_with(x, base, prob_spec, data, loss, &plans)
}
