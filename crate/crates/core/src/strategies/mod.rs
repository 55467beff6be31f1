//! Pool-scoring strategies and argmax selection.

mod retrain;
mod uncertainty;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{train, ClassifierSpec};
use crate::data::{LabeledSet, Pool};
use crate::error::{Error, Result};
use crate::loss::{LossSpec, ProbabilisticClassifier};

pub use retrain::{
    draw_partition, draw_partitions, efelc_score, partition_eq_score, partition_eq_score_with,
    simple_eq_score, PartitionPlan,
};
pub use uncertainty::{least_confidence, qbc_avg_kl, qbc_vote_entropy, shannon_entropy};

pub const DEFAULT_PARTITION_REPEATS: usize = 10;
pub const DEFAULT_SUBSAMPLE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Rs,
    Lc,
    Se,
    QbcVote,
    QbcKl,
    Efelc,
    SimpleEq,
    PartitionEq,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 8] = [
        Self::Rs,
        Self::Lc,
        Self::Se,
        Self::QbcVote,
        Self::QbcKl,
        Self::Efelc,
        Self::SimpleEq,
        Self::PartitionEq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Rs => "rs",
            Self::Lc => "lc",
            Self::Se => "se",
            Self::QbcVote => "qbc_vote",
            Self::QbcKl => "qbc_kl",
            Self::Efelc => "efelc",
            Self::SimpleEq => "simple_eq",
            Self::PartitionEq => "partition_eq",
        }
    }

    pub fn is_retrain_based(self) -> bool {
        matches!(self, Self::Efelc | Self::SimpleEq | Self::PartitionEq)
    }

    pub fn is_committee(self) -> bool {
        matches!(self, Self::QbcVote | Self::QbcKl)
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::BadSpec(format!("unknown strategy '{s}'")))
    }
}

fn default_repeats() -> usize {
    DEFAULT_PARTITION_REPEATS
}

fn default_subsample() -> usize {
    DEFAULT_SUBSAMPLE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    /// QBC members. `None` means [`ClassifierSpec::default_committee`].
    #[serde(default)]
    pub committee: Option<Vec<ClassifierSpec>>,
    #[serde(default = "default_repeats")]
    pub partition_repeats: usize,
    /// Estimator for the class probabilities in partitionEQ. `None` means the
    /// base classifier.
    #[serde(default)]
    pub prob_spec: Option<ClassifierSpec>,
    /// Pool sub-sample size for the retrain-based kinds.
    #[serde(default = "default_subsample")]
    pub subsample: usize,
    #[serde(default)]
    pub seed: u64,
}

impl StrategySpec {
    pub fn new(kind: StrategyKind) -> Self {
        Self {
            kind,
            committee: None,
            partition_repeats: DEFAULT_PARTITION_REPEATS,
            prob_spec: None,
            subsample: DEFAULT_SUBSAMPLE,
            seed: 0,
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn committee(&self) -> Vec<ClassifierSpec> {
        self.committee
            .clone()
            .unwrap_or_else(|| ClassifierSpec::default_committee(self.seed))
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.is_committee() {
            let committee = self.committee();
            if committee.len() < 2 {
                return Err(Error::EmptyCommittee(committee.len()));
            }
            committee.iter().try_for_each(ClassifierSpec::validate)?;
        }
        if self.partition_repeats == 0 {
            return Err(Error::BadSpec("partition_repeats must be at least 1".into()));
        }
        if self.subsample == 0 {
            return Err(Error::BadSpec("subsample must be at least 1".into()));
        }
        if let Some(p) = &self.prob_spec {
            p.validate()?;
        }
        Ok(())
    }
}

/// Scores for the evaluated pool ids. Higher is preferred.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub ids: Vec<usize>,
    pub scores: Vec<f64>,
}

impl ScoreVector {
    pub fn new(ids: Vec<usize>, scores: Vec<f64>) -> Result<Self> {
        if ids.len() != scores.len() {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: scores.len(),
            });
        }
        if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
            return Err(Error::BadSpec(format!("non-finite score {s}")));
        }
        Ok(Self { ids, scores })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<f64> {
        self.ids.iter().position(|&i| i == id).map(|i| self.scores[i])
    }
}

/// A uniform sample of `min(n_u, |pool|)` ids without replacement. Pool order
/// is kept.
pub fn subsample_pool<R: Rng + ?Sized>(pool: &Pool, n_u: usize, rng: &mut R) -> Pool {
    if n_u >= pool.len() {
        return pool.clone();
    }
    let mut positions = index::sample(rng, pool.len(), n_u).into_vec();
    positions.sort_unstable();
    pool.select_positions(&positions)
}

/// Argmax over the evaluated ids, ties broken uniformly at random.
pub fn select<R: Rng + ?Sized>(scores: &ScoreVector, rng: &mut R) -> Result<usize> {
    let best = scores
        .scores
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = scores
        .ids
        .iter()
        .zip(&scores.scores)
        .filter(|(_, &s)| s == best)
        .map(|(&id, _)| id)
        .collect();
    match tied.len() {
        0 => Err(Error::EmptyScoreVector),
        1 => Ok(tied[0]),
        n => Ok(tied[rng.random_range(0..n)]),
    }
}

/// Scores the pool for one selection step. `rng` drives pool sub-sampling and
/// partition draws; all candidates of one step share the same partitions.
pub fn score_pool<R: Rng + ?Sized>(
    spec: &StrategySpec,
    base: &ClassifierSpec,
    data: &LabeledSet,
    pool: &Pool,
    loss: &LossSpec,
    rng: &mut R,
) -> Result<ScoreVector> {
    spec.validate()?;
    if pool.is_empty() {
        return Err(Error::EmptyScoreVector);
    }
    let scores = match spec.kind {
        StrategyKind::Rs => vec![0.0; pool.len()],
        StrategyKind::Lc | StrategyKind::Se => {
            let model = train(base, data)?;
            let f = if spec.kind == StrategyKind::Lc {
                least_confidence
            } else {
                shannon_entropy
            };
            pool.points()
                .par_iter()
                .map(|x| model.predict_proba(x).map(|p| f(&p)))
                .collect::<Result<_>>()?
        }
        StrategyKind::QbcVote | StrategyKind::QbcKl => {
            let members = spec
                .committee()
                .iter()
                .map(|m| train(m, data))
                .collect::<Result<Vec<_>>>()?;
            pool.points()
                .par_iter()
                .map(|x| {
                    let probs = members
                        .iter()
                        .map(|m| m.predict_proba(x))
                        .collect::<Result<Vec<_>>>()?;
                    if spec.kind == StrategyKind::QbcVote {
                        let votes: Vec<usize> = probs.iter().map(|p| p.allocate()).collect();
                        qbc_vote_entropy(&votes, data.n_classes())
                    } else {
                        qbc_avg_kl(&probs, loss.floor)
                    }
                })
                .collect::<Result<_>>()?
        }
        StrategyKind::Efelc | StrategyKind::SimpleEq | StrategyKind::PartitionEq => {
            let candidates = subsample_pool(pool, spec.subsample, rng);
            let scores = score_retrain(spec, base, data, pool, &candidates, loss, rng)?;
            return ScoreVector::new(candidates.ids().to_vec(), scores);
        }
    };
    ScoreVector::new(pool.ids().to_vec(), scores)
}

fn score_retrain<R: Rng + ?Sized>(
    spec: &StrategySpec,
    base: &ClassifierSpec,
    data: &LabeledSet,
    pool: &Pool,
    candidates: &Pool,
    loss: &LossSpec,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let points = candidates.points();
    match spec.kind {
        StrategyKind::Efelc | StrategyKind::SimpleEq => {
            let current = train(base, data)?;
            points
                .par_iter()
                .map(|x| {
                    let p_hat = current.predict_proba(x)?;
                    if spec.kind == StrategyKind::Efelc {
                        retrain::efelc_with(x, &p_hat, base, data, pool.points())
                    } else {
                        retrain::simple_eq_with(x, &p_hat, base, data, loss)
                    }
                })
                .collect()
        }
        StrategyKind::PartitionEq => {
            let plans = draw_partitions(data, spec.partition_repeats, rng)?;
            let prob_spec = spec.prob_spec.as_ref().unwrap_or(base);
            let prepared = retrain::prepare_partitions(&plans, prob_spec, data)?;
            points
                .par_iter()
                .map(|x| retrain::partition_eq_with(x, base, &prepared, loss))
                .collect()
        }
        _ => unreachable!("not a retrain-based strategy"),
    }
}
