//! Synthetic classification problems, CSV ingestion and seeded splitting.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{LabeledSet, Pool};
use crate::error::{Error, Result};
use crate::linalg::Gaussian;
use crate::rng::stream;

/// Retries of the labelled-split shuffle before giving up on class coverage.
pub const MAX_SPLIT_RETRIES: usize = 1000;

fn half() -> f64 {
    0.5
}

/// Where data come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    /// `N(-1, 1)` against `N(+1, 1)` with class-1 prior `prior1`.
    GaussianPair {
        #[serde(default = "half")]
        prior1: f64,
    },
    Ripley4,
    QuadraticBoundary,
    GaussianTriangles,
    OscillatingBoundary,
    CurvedBoundary,
    /// Any Gaussian mixture per class.
    Mixture(MixtureSpec),
    Csv {
        path: PathBuf,
        label_column: String,
    },
}

impl ProblemSpec {
    pub fn name(&self) -> String {
        match self {
            Self::GaussianPair { .. } => "gaussian_pair".into(),
            Self::Ripley4 => "ripley4".into(),
            Self::QuadraticBoundary => "quadratic_boundary".into(),
            Self::GaussianTriangles => "gaussian_triangles".into(),
            Self::OscillatingBoundary => "oscillating_boundary".into(),
            Self::CurvedBoundary => "curved_boundary".into(),
            Self::Mixture(_) => "mixture".into(),
            Self::Csv { path, .. } => format!(
                "csv:{}",
                path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned())
            ),
        }
    }

    /// The generating mixture, for every kind but `csv`.
    pub fn mixture(&self) -> Result<MixtureSpec> {
        let iso = |weight, mean: [f64; 2], v| Component {
            weight,
            mean: mean.to_vec(),
            cov: Covariance::Isotropic(v),
        };
        let balanced = |classes| MixtureSpec {
            prior: vec![0.5, 0.5],
            classes,
        };
        Ok(match self {
            Self::GaussianPair { prior1 } => MixtureSpec {
                prior: vec![*prior1, 1.0 - prior1],
                classes: vec![
                    vec![Component {
                        weight: 1.0,
                        mean: vec![-1.0],
                        cov: Covariance::Isotropic(1.0),
                    }],
                    vec![Component {
                        weight: 1.0,
                        mean: vec![1.0],
                        cov: Covariance::Isotropic(1.0),
                    }],
                ],
            },
            Self::Ripley4 => balanced(vec![
                vec![iso(0.5, [-0.3, 0.7], 0.03), iso(0.5, [0.4, 0.7], 0.03)],
                vec![iso(0.5, [-0.7, 0.3], 0.03), iso(0.5, [0.3, 0.3], 0.03)],
            ]),
            Self::QuadraticBoundary => balanced(vec![
                vec![Component {
                    weight: 1.0,
                    mean: vec![0.0, -0.4],
                    cov: Covariance::Full(vec![vec![0.15, 0.0], vec![0.0, 0.15]]),
                }],
                vec![Component {
                    weight: 1.0,
                    mean: vec![0.0, 0.4],
                    cov: Covariance::Full(vec![vec![2.0, 0.0], vec![0.0, 0.15]]),
                }],
            ]),
            Self::GaussianTriangles => {
                let third = 1.0 / 3.0;
                balanced(vec![
                    vec![
                        iso(third, [0.0, 1.0], 0.09),
                        iso(third, [-0.87, -0.5], 0.09),
                        iso(third, [0.87, -0.5], 0.09),
                    ],
                    vec![
                        iso(third, [0.0, -1.0], 0.09),
                        iso(third, [-0.87, 0.5], 0.09),
                        iso(third, [0.87, 0.5], 0.09),
                    ],
                ])
            }
            Self::OscillatingBoundary => {
                let xs = [-1.5, -0.5, 0.5, 1.5];
                let signs = [1.0, -1.0, 1.0, -1.0];
                let side = |dir: f64| {
                    xs.iter()
                        .zip(signs)
                        .map(|(&x, s)| iso(0.25, [x, dir * 0.5 * s], 0.08))
                        .collect()
                };
                balanced(vec![side(1.0), side(-1.0)])
            }
            Self::CurvedBoundary => {
                let arc = (0..5)
                    .map(|i| {
                        let a = std::f64::consts::PI * (0.15 + 0.7 * i as f64 / 4.0);
                        iso(0.2, [1.2 * a.cos(), 1.2 * a.sin() - 0.4], 0.06)
                    })
                    .collect();
                balanced(vec![
                    arc,
                    vec![iso(0.5, [-0.45, -0.2], 0.12), iso(0.5, [0.45, -0.2], 0.12)],
                ])
            }
            Self::Mixture(m) => m.clone(),
            Self::Csv { .. } => {
                return Err(Error::UnsupportedProblem(self.name()));
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Covariance {
    Isotropic(f64),
    Full(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub cov: Covariance,
}

/// Class prior plus a Gaussian mixture for each class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub prior: Vec<f64>,
    pub classes: Vec<Vec<Component>>,
}

fn check_weights(w: &[f64], what: &str) -> Result<()> {
    if w.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::BadSpec(format!("{what} weights must be positive")));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::BadSpec(format!("{what} weights sum to {s}, not 1")));
    }
    Ok(())
}

/// A validated mixture ready for sampling and density evaluation.
#[derive(Debug, Clone)]
pub struct GaussianMixture {
    prior: Vec<f64>,
    classes: Vec<Vec<(f64, Gaussian)>>,
    dim: usize,
}

impl GaussianMixture {
    pub fn new(spec: &MixtureSpec) -> Result<Self> {
        if spec.classes.len() < 2 || spec.prior.len() != spec.classes.len() {
            return Err(Error::BadSpec(
                "need a prior entry and a mixture for each of at least two classes".into(),
            ));
        }
        check_weights(&spec.prior, "prior")?;
        let dim = spec.classes[0]
            .first()
            .map(|c| c.mean.len())
            .ok_or_else(|| Error::BadSpec("class with no components".into()))?;
        if dim == 0 {
            return Err(Error::BadSpec("zero-dimensional component".into()));
        }
        let mut classes = Vec::with_capacity(spec.classes.len());
        for comps in &spec.classes {
            if comps.is_empty() {
                return Err(Error::BadSpec("class with no components".into()));
            }
            let w: Vec<f64> = comps.iter().map(|c| c.weight).collect();
            check_weights(&w, "component")?;
            let mut built = Vec::with_capacity(comps.len());
            for c in comps {
                if c.mean.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: c.mean.len(),
                    });
                }
                let cov = dense_cov(&c.cov, dim)?;
                if crate::linalg::cholesky(&cov, dim).is_none() {
                    return Err(Error::BadSpec("covariance is not positive definite".into()));
                }
                built.push((c.weight, Gaussian::new(c.mean.clone(), cov, 0.0)));
            }
            classes.push(built);
        }
        Ok(Self {
            prior: spec.prior.clone(),
            classes,
            dim,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    /// Class-conditional density of `x` under class `class`.
    pub fn class_density(&self, class: usize, x: &[f64]) -> f64 {
        self.classes[class]
            .iter()
            .map(|(w, g)| w * g.log_pdf(x).exp())
            .sum()
    }

    /// True posterior class probabilities at `x`.
    pub fn posterior(&self, x: &[f64]) -> Vec<f64> {
        let joint: Vec<f64> = (0..self.n_classes())
            .map(|j| self.prior[j] * self.class_density(j, x))
            .collect();
        let total: f64 = joint.iter().sum();
        if total > 0.0 {
            joint.iter().map(|v| v / total).collect()
        } else {
            self.prior.clone()
        }
    }

    /// The Bayes allocation (ties to the lowest class).
    pub fn bayes_class(&self, x: &[f64]) -> usize {
        let p = self.posterior(x);
        let mut best = 0;
        for (j, v) in p.iter().enumerate() {
            if *v > p[best] {
                best = j;
            }
        }
        best
    }

    fn pick<R: Rng + ?Sized>(weights: impl Iterator<Item = f64>, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = 0;
        for (i, w) in weights.enumerate() {
            acc += w;
            last = i;
            if u < acc {
                return i;
            }
        }
        last
    }

    /// One draw of a class label and a point.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, usize) {
        let y = Self::pick(self.prior.iter().copied(), rng);
        (self.sample_class(y, rng), y)
    }

    pub fn sample_class<R: Rng + ?Sized>(&self, class: usize, rng: &mut R) -> Vec<f64> {
        let comps = &self.classes[class];
        let c = Self::pick(comps.iter().map(|(w, _)| *w), rng);
        let e: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
        comps[c].1.transform(&e)
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<LabeledSet> {
        let (points, labels) = (0..n).map(|_| self.sample_one(rng)).unzip();
        LabeledSet::with_dim(points, labels, self.n_classes(), self.dim)
    }

    /// Monte-Carlo Bayes error over `n` fresh draws.
    pub fn bayes_error<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> f64 {
        let wrong = (0..n)
            .filter(|_| {
                let (x, y) = self.sample_one(rng);
                self.bayes_class(&x) != y
            })
            .count();
        wrong as f64 / n as f64
    }
}

fn dense_cov(cov: &Covariance, dim: usize) -> Result<Vec<f64>> {
    match cov {
        Covariance::Isotropic(v) => {
            if !(*v > 0.0) {
                return Err(Error::BadSpec(format!("variance {v} must be positive")));
            }
            let mut m = vec![0.0; dim * dim];
            for i in 0..dim {
                m[i * dim + i] = *v;
            }
            Ok(m)
        }
        Covariance::Full(rows) => {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(Error::BadSpec(format!("covariance must be {dim}x{dim}")));
            }
            for i in 0..dim {
                for j in 0..i {
                    if (rows[i][j] - rows[j][i]).abs() > 1e-12 {
                        return Err(Error::BadSpec("covariance is not symmetric".into()));
                    }
                }
            }
            Ok(rows.concat())
        }
    }
}

/// `n` i.i.d. draws from a synthetic problem.
pub fn generate<R: Rng + ?Sized>(spec: &ProblemSpec, n: usize, rng: &mut R) -> Result<LabeledSet> {
    if n == 0 {
        return Err(Error::BadSpec("n must be at least 1".into()));
    }
    if matches!(spec, ProblemSpec::Csv { .. }) {
        return Err(Error::BadSpec("csv problems are loaded, not generated".into()));
    }
    GaussianMixture::new(&spec.mixture()?)?.sample(n, rng)
}

/// A CSV dataset with the label names in class-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvData {
    pub data: LabeledSet,
    pub label_names: Vec<String>,
    pub covariate_names: Vec<String>,
}

/// Reads a headed CSV. Every column but `label_column` must be numeric.
/// Labels become classes in order of first appearance.
pub fn load_csv(path: &Path, label_column: &str) -> Result<LabeledSet> {
    load_csv_with_names(path, label_column).map(|c| c.data)
}

pub fn load_csv_with_names(path: &Path, label_column: &str) -> Result<CsvData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::MissingLabelColumn {
            path: path.to_path_buf(),
            column: label_column.to_string(),
        })?;
    let covariate_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.to_string())
        .collect();
    let mut mapping: HashMap<String, usize> = HashMap::new();
    let mut label_names = Vec::new();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let row = row + 1;
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            row,
            column: e.position().map_or(0, |p| p.record() as usize),
            message: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row,
                column: record.len().min(headers.len()),
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        let mut x = Vec::with_capacity(covariate_names.len());
        for (i, field) in record.iter().enumerate() {
            if i == label_idx {
                continue;
            }
            let v: f64 = field.parse().map_err(|_| Error::NonNumericCovariate {
                path: path.to_path_buf(),
                row,
                column: headers[i].to_string(),
                value: field.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonNumericCovariate {
                    path: path.to_path_buf(),
                    row,
                    column: headers[i].to_string(),
                    value: field.to_string(),
                });
            }
            x.push(v);
        }
        let name = &record[label_idx];
        let next = label_names.len();
        let y = *mapping.entry(name.to_string()).or_insert_with(|| {
            label_names.push(name.to_string());
            next
        });
        points.push(x);
        labels.push(y);
    }
    let data = LabeledSet::with_dim(points, labels, label_names.len().max(2), covariate_names.len())?;
    Ok(CsvData {
        data,
        label_names,
        covariate_names,
    })
}

/// Writes a labelled set in the format [`load_csv`] reads, labels as names.
pub fn write_csv(path: &Path, data: &CsvData, label_column: &str) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = data.covariate_names.clone();
    header.push(label_column.to_string());
    w.write_record(&header)?;
    for (x, y) in data.data.iter() {
        let mut row: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        row.push(data.label_names[y].clone());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// The data a run starts from: initial labelled set, pool and test set.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub labeled: LabeledSet,
    pub pool: Pool,
    pub test: LabeledSet,
    pub seed: u64,
    /// Row indices (in the source data) of each part. Pool ids are row indices too.
    pub labeled_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

/// Shuffles `data` with `seed` and cuts it into labelled, pool and test parts.
/// The shuffle is redrawn until the labelled part holds every class.
pub fn split(
    data: &LabeledSet,
    seed: u64,
    n_labeled: usize,
    n_pool: usize,
    n_test: usize,
) -> Result<DatasetBundle> {
    let needed = n_labeled + n_pool + n_test;
    if needed > data.len() {
        return Err(Error::NotEnoughData {
            requested: needed,
            available: data.len(),
        });
    }
    let k = data.n_classes();
    if n_labeled < k || data.class_counts().contains(&0) {
        return Err(Error::ClassCoverageImpossible { n_classes: k });
    }
    let mut rng = stream(seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    for _ in 0..MAX_SPLIT_RETRIES {
        order.shuffle(&mut rng);
        let mut seen = vec![false; k];
        order[..n_labeled].iter().for_each(|&i| seen[data.label(i)] = true);
        if seen.iter().all(|&s| s) {
            let labeled_rows = order[..n_labeled].to_vec();
            let pool_rows = &order[n_labeled..n_labeled + n_pool];
            let test_rows = order[n_labeled + n_pool..needed].to_vec();
            let pool = Pool::with_dim(
                pool_rows.to_vec(),
                pool_rows.iter().map(|&i| data.point(i).to_vec()).collect(),
                pool_rows.iter().map(|&i| data.label(i)).collect(),
                data.dim(),
            )?;
            return Ok(DatasetBundle {
                labeled: data.subset(&labeled_rows),
                pool,
                test: data.subset(&test_rows),
                seed,
                labeled_rows,
                test_rows,
            });
        }
    }
    Err(Error::ClassCoverageImpossible { n_classes: k })
}
