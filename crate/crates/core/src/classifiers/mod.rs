//! Base classifiers and committee members.
//!
//! Every classifier is trained by [`train`] from a [`ClassifierSpec`] and a
//! [`LabeledSet`], producing an immutable [`TrainedModel`]. Training is a pure
//! function of the spec and the *content* of the data: reordering the training
//! examples never changes a prediction.
//!
//! Small labelled sets are the norm in active learning, so every model has a
//! fallback for degenerate fits:
//!
//! * singular covariances get `var_floor` added to the diagonal;
//! * classes absent from the training data get probability zero;
//! * the parametric models predict `1 - (k-1)·1e-9` for the only class present
//!   when the training data holds a single class.

mod forest;
mod gaussian;
mod knn;
mod logistic;

use serde::{Deserialize, Serialize};

use crate::data::{ClassDistribution, LabeledSet};
use crate::error::{Error, Result};
use crate::loss::ProbabilisticClassifier;

pub use forest::ForestModel;
pub use gaussian::{CovarianceKind, GaussianModel};
pub use knn::KnnModel;
pub use logistic::LogisticModel;

pub const DEFAULT_VAR_FLOOR: f64 = 1e-6;
/// Probability mass given to each absent class by the single-class fallback.
pub const SINGLE_CLASS_EPS: f64 = 1e-9;

fn default_var_floor() -> f64 {
    DEFAULT_VAR_FLOOR
}

fn default_true() -> bool {
    true
}

/// What to train, with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Lda {
        #[serde(default = "default_var_floor")]
        var_floor: f64,
    },
    Qda {
        #[serde(default = "default_var_floor")]
        var_floor: f64,
    },
    GaussianNb {
        #[serde(default = "default_var_floor")]
        var_floor: f64,
    },
    Knn {
        k: usize,
        /// Adds a `1/n_classes` pseudo-count to every class.
        #[serde(default = "default_true")]
        smoothing: bool,
    },
    LogisticRegression {
        #[serde(default = "LogisticParams::default_max_iter")]
        max_iter: usize,
        #[serde(default = "LogisticParams::default_step")]
        step: f64,
        #[serde(default = "LogisticParams::default_l2")]
        l2: f64,
    },
    RandomForest {
        #[serde(default = "ForestParams::default_trees")]
        trees: usize,
        #[serde(default = "ForestParams::default_max_depth")]
        max_depth: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Estimates class means only, with unit variance and a fixed prior
    /// (uniform when absent). This is the classifier of the univariate
    /// two-Gaussian problem, generalised to any dimension.
    UnitGaussian {
        #[serde(default)]
        prior: Option<Vec<f64>>,
    },
}

pub(crate) struct LogisticParams;

impl LogisticParams {
    fn default_max_iter() -> usize {
        500
    }
    fn default_step() -> f64 {
        0.1
    }
    fn default_l2() -> f64 {
        1e-4
    }
}

pub(crate) struct ForestParams;

impl ForestParams {
    fn default_trees() -> usize {
        25
    }
    fn default_max_depth() -> usize {
        8
    }
}

impl ClassifierSpec {
    pub fn lda() -> Self {
        Self::Lda {
            var_floor: DEFAULT_VAR_FLOOR,
        }
    }

    pub fn qda() -> Self {
        Self::Qda {
            var_floor: DEFAULT_VAR_FLOOR,
        }
    }

    pub fn gaussian_nb() -> Self {
        Self::GaussianNb {
            var_floor: DEFAULT_VAR_FLOOR,
        }
    }

    pub fn knn(k: usize) -> Self {
        Self::Knn { k, smoothing: true }
    }

    pub fn knn_unsmoothed(k: usize) -> Self {
        Self::Knn {
            k,
            smoothing: false,
        }
    }

    pub fn logistic_regression() -> Self {
        Self::LogisticRegression {
            max_iter: LogisticParams::default_max_iter(),
            step: LogisticParams::default_step(),
            l2: LogisticParams::default_l2(),
        }
    }

    pub fn random_forest(seed: u64) -> Self {
        Self::RandomForest {
            trees: ForestParams::default_trees(),
            max_depth: ForestParams::default_max_depth(),
            seed,
        }
    }

    pub fn unit_gaussian(prior: Option<Vec<f64>>) -> Self {
        Self::UnitGaussian { prior }
    }

    /// The four-member committee: logistic regression, 5-nn, 21-nn and a forest.
    pub fn default_committee(seed: u64) -> Vec<Self> {
        vec![
            Self::logistic_regression(),
            Self::knn(5),
            Self::knn(21),
            Self::random_forest(seed),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::BadSpec(m));
        match self {
            Self::Lda { var_floor } | Self::Qda { var_floor } | Self::GaussianNb { var_floor }
                if !(*var_floor > 0.0) =>
            {
                bad(format!("variance floor must be positive, got {var_floor}"))
            }
            Self::Knn { k, .. } if *k == 0 => bad("k_neighbors must be at least 1".into()),
            Self::RandomForest { trees, .. } if *trees == 0 => {
                bad("tree_count must be at least 1".into())
            }
            Self::LogisticRegression { step, l2, .. } if !(*step > 0.0) || *l2 < 0.0 => {
                bad("logistic regression needs step > 0 and l2 >= 0".into())
            }
            Self::UnitGaussian { prior: Some(p) }
                if p.iter().any(|v| !(*v > 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 =>
            {
                bad(format!("prior must be positive and sum to one: {p:?}"))
            }
            _ => Ok(()),
        }
    }

    /// Short name used in reports, e.g. `5-nn` or `lda`.
    pub fn name(&self) -> String {
        match self {
            Self::Lda { .. } => "lda".into(),
            Self::Qda { .. } => "qda".into(),
            Self::GaussianNb { .. } => "nb".into(),
            Self::Knn { k, .. } => format!("{k}-nn"),
            Self::LogisticRegression { .. } => "logreg".into(),
            Self::RandomForest { .. } => "rf".into(),
            Self::UnitGaussian { .. } => "unit_gaussian".into(),
        }
    }
}

#[derive(Debug, Clone)]
enum Fitted {
    Gaussian(GaussianModel),
    Knn(KnnModel),
    Logistic(LogisticModel),
    Forest(ForestModel),
    Constant(ClassDistribution),
}

/// A trained classifier together with the spec it was trained from.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    spec: ClassifierSpec,
    n_classes: usize,
    dim: usize,
    fitted: Fitted,
}

impl TrainedModel {
    pub fn spec(&self) -> &ClassifierSpec {
        &self.spec
    }
}

impl ProbabilisticClassifier for TrainedModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn predict_proba(&self, x: &[f64]) -> Result<ClassDistribution> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        match &self.fitted {
            Fitted::Gaussian(m) => m.predict(x),
            Fitted::Knn(m) => m.predict(x),
            Fitted::Logistic(m) => m.predict(x),
            Fitted::Forest(m) => m.predict(x),
            Fitted::Constant(p) => Ok(p.clone()),
        }
    }
}

/// Fits `spec` to `data`.
pub fn train(spec: &ClassifierSpec, data: &LabeledSet) -> Result<TrainedModel> {
    spec.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if data.dim() == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    let k = data.n_classes();
    let counts = data.class_counts();
    let present: Vec<usize> = (0..k).filter(|&c| counts[c] > 0).collect();
    let parametric = !matches!(
        spec,
        ClassifierSpec::Knn { .. } | ClassifierSpec::RandomForest { .. }
    );
    let fitted = if parametric && present.len() == 1 {
        Fitted::Constant(ClassDistribution::near_certain(
            k,
            present[0],
            SINGLE_CLASS_EPS,
        ))
    } else {
        match spec {
            ClassifierSpec::Lda { var_floor } => {
                Fitted::Gaussian(GaussianModel::fit(data, CovarianceKind::Pooled, *var_floor)?)
            }
            ClassifierSpec::Qda { var_floor } => {
                Fitted::Gaussian(GaussianModel::fit(data, CovarianceKind::PerClass, *var_floor)?)
            }
            ClassifierSpec::GaussianNb { var_floor } => {
                Fitted::Gaussian(GaussianModel::fit(data, CovarianceKind::Diagonal, *var_floor)?)
            }
            ClassifierSpec::UnitGaussian { prior } => {
                if let Some(p) = prior {
                    if p.len() != k {
                        return Err(Error::BadSpec(format!(
                            "prior has {} entries for {k} classes",
                            p.len()
                        )));
                    }
                }
                Fitted::Gaussian(GaussianModel::fit_unit(data, prior.as_deref())?)
            }
            ClassifierSpec::Knn { k: neighbours, smoothing } => {
                Fitted::Knn(KnnModel::fit(data, *neighbours, *smoothing))
            }
            ClassifierSpec::LogisticRegression { max_iter, step, l2 } => {
                Fitted::Logistic(LogisticModel::fit(data, *max_iter, *step, *l2))
            }
            ClassifierSpec::RandomForest {
                trees,
                max_depth,
                seed,
            } => Fitted::Forest(ForestModel::fit(data, *trees, *max_depth, *seed)),
        }
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        n_classes: k,
        dim: data.dim(),
        fitted,
    })
}

/// Order-independent canonical ordering of a labelled set: by label, then
/// lexicographically by covariates.
pub(crate) fn canonical_order(data: &LabeledSet) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.sort_by(|&a, &b| {
        data.label(a).cmp(&data.label(b)).then_with(|| {
            data.point(a)
                .iter()
                .zip(data.point(b))
                .map(|(u, v)| u.total_cmp(v))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    idx
}
