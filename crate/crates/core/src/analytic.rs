//! Closed forms for the univariate two-Gaussian problem.
//!
//! Classes 1 and 2 (indices 0 and 1) are `N(-1, 1)` and `N(+1, 1)`. The
//! classifier estimates the two means with unit variance and allocates by the
//! nearer estimated mean, so its boundary is `t̂ = (μ̂₁ + μ̂₂) / 2`. Adding one
//! labelled example to class `j` moves its mean by a fraction `z_j = 1/(n_j+1)`,
//! which is `2/(n+2)` when the `n` labels are split equally.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::derived_stream;

pub const MEANS: [f64; 2] = [-1.0, 1.0];

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPairProblem {
    prior: [f64; 2],
}

impl Default for GaussianPairProblem {
    fn default() -> Self {
        Self::balanced()
    }
}

impl GaussianPairProblem {
    pub fn balanced() -> Self {
        Self { prior: [0.5, 0.5] }
    }

    /// The problem with class-1 prior `pi1`.
    pub fn with_prior(pi1: f64) -> Result<Self> {
        if !(pi1 > 0.0 && pi1 < 1.0) {
            return Err(Error::BadSpec(format!("prior {pi1} not in (0, 1)")));
        }
        Ok(Self {
            prior: [pi1, 1.0 - pi1],
        })
    }

    pub fn prior(&self) -> [f64; 2] {
        self.prior
    }

    pub fn is_balanced(&self) -> bool {
        self.prior[0] == 0.5
    }

    /// Class-conditional densities `(q₁(x), q₂(x))`.
    pub fn densities(&self, x: f64) -> [f64; 2] {
        [normal_pdf(x - MEANS[0]), normal_pdf(x - MEANS[1])]
    }

    /// True posteriors `(p₁(x), p₂(x))`.
    pub fn posterior(&self, x: f64) -> [f64; 2] {
        // Odds of class 2 against class 1: (π₂/π₁)·exp(2x).
        let p1 = 1.0 / (1.0 + (self.prior[1] / self.prior[0]) * (2.0 * x).exp());
        [p1, 1.0 - p1]
    }

    /// `P(X ≤ t | class j)`.
    pub fn class_cdf(&self, class: usize, t: f64) -> f64 {
        normal_cdf(t - MEANS[class])
    }
}

/// The estimated means together with how many labels each rests on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticClassifier {
    pub mu: [f64; 2],
    pub counts: [usize; 2],
}

impl AnalyticClassifier {
    /// Means estimated from `n` labels split equally between the classes.
    pub fn new(mu1: f64, mu2: f64, n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::BadSpec(format!("n = {n} must be even and at least 2")));
        }
        Self::with_counts([mu1, mu2], [n / 2, n / 2])
    }

    pub fn with_counts(mu: [f64; 2], counts: [usize; 2]) -> Result<Self> {
        if counts.contains(&0) {
            return Err(Error::BadSpec("each class needs at least one label".into()));
        }
        if !mu.iter().all(|m| m.is_finite()) {
            return Err(Error::BadSpec("means must be finite".into()));
        }
        Ok(Self { mu, counts })
    }

    pub fn n(&self) -> usize {
        self.counts[0] + self.counts[1]
    }

    pub fn boundary(&self) -> f64 {
        0.5 * (self.mu[0] + self.mu[1])
    }

    /// The updating constant for a new label of class `class`.
    pub fn z(&self, class: usize) -> f64 {
        1.0 / (self.counts[class] as f64 + 1.0)
    }

    /// Allocation by nearer estimated mean, ties to class 1.
    pub fn allocate(&self, x: f64) -> usize {
        usize::from((x - self.mu[1]).abs() < (x - self.mu[0]).abs())
    }
}

/// A scalar Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalSummary {
    pub mean: f64,
    pub variance: f64,
}

impl NormalSummary {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) {
            return Err(Error::BadSpec(format!("variance {variance} must be positive")));
        }
        Ok(Self { mean, variance })
    }

    pub fn cdf(&self, at: f64) -> f64 {
        normal_cdf((at - self.mean) / self.variance.sqrt())
    }
}

/// Expected error rate of `clf` on `prob`.
pub fn error_loss(clf: &AnalyticClassifier, prob: &GaussianPairProblem) -> f64 {
    let [m1, m2] = clf.mu;
    if m1 == m2 {
        return 0.5;
    }
    let t = clf.boundary();
    let f1 = prob.class_cdf(0, t);
    let f2 = prob.class_cdf(1, t);
    let [pi1, pi2] = prob.prior;
    if m1 < m2 {
        pi1 * (1.0 - f1) + pi2 * f2
    } else {
        pi1 * f1 + pi2 * (1.0 - f2)
    }
}

/// The classifier after adding `(x, class)` to its data.
pub fn update_after(clf: &AnalyticClassifier, x: f64, class: usize) -> AnalyticClassifier {
    let z = clf.z(class);
    let mut next = *clf;
    next.mu[class] = (1.0 - z) * clf.mu[class] + z * x;
    next.counts[class] += 1;
    next
}

/// The updated boundary computed directly: `t̂ + (z/2)(x - μ̂_j)`.
pub fn updated_boundary(clf: &AnalyticClassifier, x: f64, class: usize) -> f64 {
    clf.boundary() + 0.5 * clf.z(class) * (x - clf.mu[class])
}

/// Conditional expected loss reduction from labelling `x`.
pub fn qc(clf: &AnalyticClassifier, prob: &GaussianPairProblem, x: f64) -> f64 {
    let p = prob.posterior(x);
    let after: f64 = (0..2)
        .map(|j| p[j] * error_loss(&update_after(clf, x, j), prob))
        .sum();
    error_loss(clf, prob) - after
}

/// Which variance to use for the post-update boundary distributions in the
/// marginal closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QmVariance {
    /// `1 + (z² - 2z + 2)/(2n)`, which accounts for the covariance between the
    /// boundary and the updated mean. Agrees with dataset-level Monte Carlo.
    #[default]
    Corrected,
    /// `1 + (2 + z²)/(2n)` as published.
    Published,
}

/// The nine Gaussians the marginal closed form is built from, in the order
/// Z₃, Z₆, Z₈, Z₉, Z₁₀, Z₁₁, Z₁₂, Z₁₃, Z₁₆.
pub fn qm_summaries(n: usize, x: f64, variance: QmVariance) -> Result<[NormalSummary; 9]> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::BadSpec(format!("n = {n} must be even and at least 2")));
    }
    let nf = n as f64;
    let z = 2.0 / (nf + 2.0);
    let shift = match variance {
        QmVariance::Corrected => (z * z - 2.0 * z + 2.0) / (2.0 * nf),
        QmVariance::Published => (2.0 + z * z) / (2.0 * nf),
    };
    let v = 1.0 + shift;
    let v_gap = 2.0 / nf * (z * z - 2.0 * z + 2.0);
    let s = |m, v| NormalSummary::new(m, v);
    Ok([
        s(-1.0 - 0.5 * z * (x + 1.0), v)?,
        s(1.0 - 0.5 * z * (x + 1.0), v)?,
        s(-1.0 - 0.5 * z * (x - 1.0), v)?,
        s(1.0 - 0.5 * z * (x - 1.0), v)?,
        s(-1.0, (nf + 1.0) / nf)?,
        s(1.0, (nf + 1.0) / nf)?,
        s(-2.0, 4.0 / nf)?,
        s(z + z * x - 2.0, v_gap)?,
        s(z - z * x - 2.0, v_gap)?,
    ])
}

/// Marginal expected loss reduction on the balanced problem, averaged over
/// datasets of `n` labels split equally.
pub fn qm(n: usize, x: f64) -> Result<f64> {
    qm_with(&GaussianPairProblem::balanced(), n, x, QmVariance::Corrected)
}

pub fn qm_with(prob: &GaussianPairProblem, n: usize, x: f64, variance: QmVariance) -> Result<f64> {
    if !prob.is_balanced() {
        return Err(Error::UnsupportedPrior);
    }
    let [z3, z6, z8, z9, z10, z11, z12, z13, z16] = qm_summaries(n, x, variance)?;
    // Expected balanced error loss given P(F₁), P(F₂) and P(μ̂₁ > μ̂₂).
    let term = |f1: f64, f2: f64, swapped: f64| 0.5 * (1.0 - f1 + f2 + swapped * (2.0 * f1 - 2.0 * f2));
    let before = term(z10.cdf(0.0), z11.cdf(0.0), 1.0 - z12.cdf(0.0));
    let after1 = term(z3.cdf(0.0), z6.cdf(0.0), 1.0 - z13.cdf(0.0));
    let after2 = term(z8.cdf(0.0), z9.cdf(0.0), 1.0 - z16.cdf(0.0));
    let [p1, p2] = prob.posterior(x);
    Ok(before - p1 * after1 - p2 * after2)
}

/// Uncertainty sampling picks the estimated boundary.
pub fn se_selection(clf: &AnalyticClassifier) -> f64 {
    clf.boundary()
}

/// Random selection draws from the marginal density.
pub fn rs_density(prob: &GaussianPairProblem, x: f64) -> f64 {
    let q = prob.densities(x);
    prob.prior[0] * q[0] + prob.prior[1] * q[1]
}

/// Values of a criterion over a grid with its maximiser.
#[derive(Debug, Clone, PartialEq)]
pub struct EqCurve {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub argmax: f64,
    pub max: f64,
}

impl EqCurve {
    pub fn from_fn<F: Fn(f64) -> Result<f64>>(grid: &[f64], f: F) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadSpec("grid must be strictly increasing".into()));
        }
        let values = grid.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        // Strict comparison on an increasing grid keeps the smallest x on ties.
        let mut best = 0;
        for (i, v) in values.iter().enumerate() {
            if *v > values[best] {
                best = i;
            }
        }
        Ok(Self {
            xs: grid.to_vec(),
            argmax: grid[best],
            max: values[best],
            values,
        })
    }
}

/// `lo, lo + step, ..., hi` with each point rounded to the step's precision.
pub fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || hi < lo {
        return Err(Error::EmptyGrid);
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let scale = 1e9;
    Ok((0..=n)
        .map(|i| ((lo + i as f64 * step) * scale).round() / scale)
        .collect())
}

pub fn qc_curve(clf: &AnalyticClassifier, prob: &GaussianPairProblem, grid: &[f64]) -> Result<EqCurve> {
    EqCurve::from_fn(grid, |x| Ok(qc(clf, prob, x)))
}

pub fn qm_curve(n: usize, grid: &[f64]) -> Result<EqCurve> {
    EqCurve::from_fn(grid, |x| qm(n, x))
}

/// `(x_*, Q^c(x_*))` over `grid`, ties to the smallest x.
pub fn optimal_on_grid(
    clf: &AnalyticClassifier,
    prob: &GaussianPairProblem,
    grid: &[f64],
) -> Result<(f64, f64)> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut best = (grid[0], qc(clf, prob, grid[0]));
    for &x in &grid[1..] {
        let v = qc(clf, prob, x);
        if v > best.1 || (v == best.1 && x < best.0) {
            best = (x, v);
        }
    }
    Ok(best)
}

/// `Q^c(x_*) - Q^c(x_r)`.
pub fn regret(
    clf: &AnalyticClassifier,
    prob: &GaussianPairProblem,
    x_r: f64,
    grid: &[f64],
) -> Result<f64> {
    let (_, best) = optimal_on_grid(clf, prob, grid)?;
    Ok(best - qc(clf, prob, x_r))
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    /// Whether `value` lies within `k` standard errors.
    pub fn agrees(&self, value: f64, k: f64) -> bool {
        (value - self.mean).abs() <= k * self.se
    }
}

const CHUNK: usize = 20_000;

/// Averages `draw` over `total` draws in fixed chunks, each with its own
/// derived stream, so the result does not depend on thread count.
fn chunked_mean<F>(total: usize, seed: u64, tag: &str, draw: F) -> Estimate
where
    F: Fn(&mut crate::rng::StreamRng) -> f64 + Sync,
{
    let chunks = total.div_ceil(CHUNK);
    let sums: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = derived_stream(seed, &[tag, &c.to_string()]);
            let len = CHUNK.min(total - c * CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                let v = draw(&mut rng);
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = total as f64;
    let mean = s / n;
    let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
    Estimate {
        mean,
        se: (var / n).sqrt(),
    }
}

fn sample_class<R: Rng + ?Sized>(rng: &mut R, p1: f64) -> usize {
    usize::from(rng.random::<f64>() >= p1)
}

fn sample_point<R: Rng + ?Sized>(rng: &mut R, class: usize) -> f64 {
    MEANS[class] + rng.sample::<f64, _>(StandardNormal)
}

/// Monte-Carlo `Q^c`: each draw labels `x` from its true posterior, updates
/// the classifier, and classifies one fresh test point with both the current
/// and the updated classifier. The per-draw value is the difference in
/// misclassification.
pub fn qc_oracle(
    clf: &AnalyticClassifier,
    prob: &GaussianPairProblem,
    x: f64,
    draws: usize,
    seed: u64,
) -> Estimate {
    let p1 = prob.posterior(x)[0];
    let prior1 = prob.prior[0];
    chunked_mean(draws, seed, "qc_oracle", |rng| {
        let label = sample_class(rng, p1);
        let updated = update_after(clf, x, label);
        let y = sample_class(rng, prior1);
        let xt = sample_point(rng, y);
        let before = f64::from(u8::from(clf.allocate(xt) != y));
        let after = f64::from(u8::from(updated.allocate(xt) != y));
        before - after
    })
}

/// Monte-Carlo `Q^m`: averages the closed-form `Q^c` over datasets of `n`
/// labels drawn with the class counts fixed at `round(n π₁)` and the rest.
pub fn qm_oracle(
    prob: &GaussianPairProblem,
    n: usize,
    x: f64,
    datasets: usize,
    seed: u64,
) -> Result<Estimate> {
    let n1 = (n as f64 * prob.prior[0]).round() as usize;
    let counts = [n1, n - n1.min(n)];
    if counts.contains(&0) {
        return Err(Error::BadSpec(format!(
            "n = {n} leaves a class without labels"
        )));
    }
    Ok(chunked_mean(datasets, seed, "qm_oracle", |rng| {
        let mut mu = [0.0; 2];
        for j in 0..2 {
            let s: f64 = (0..counts[j]).map(|_| sample_point(rng, j)).sum();
            mu[j] = s / counts[j] as f64;
        }
        qc(&AnalyticClassifier { mu, counts }, prob, x)
    }))
}
