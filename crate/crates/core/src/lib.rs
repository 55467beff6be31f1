//! An active-learning laboratory built around expected loss reduction.
//!
//! * [`data`] and [`loss`]: examples, pools, class distributions and losses.
//! * [`classifiers`]: LDA, QDA, Gaussian naive Bayes, k-NN, logistic
//!   regression, a random forest, and the unit-variance mean classifier.
//! * [`strategies`]: random selection, uncertainty sampling, query by
//!   committee, EfeLc, and the two expected-loss-reduction estimators.
//! * [`analytic`]: exact expected loss reduction for the univariate
//!   two-Gaussian problem, with Monte-Carlo oracles.
//! * [`problems`], [`metrics`], [`sensitivity`], [`harness`]: data sources,
//!   learning-curve metrics, rank-stability studies and the experiment runner.

pub mod analytic;
pub mod classifiers;
pub mod data;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod loss;
pub mod metrics;
pub mod problems;
pub mod rng;
pub mod sensitivity;
pub mod strategies;

pub use data::{class_prior, ClassDistribution, Example, LabeledSet, Pool};
pub use error::{Error, Result};
pub use loss::{empirical_loss, estimate_expected_loss, LossKind, LossSpec, ProbabilisticClassifier};
