//! Learning-curve metrics, rank aggregation and spatial autocorrelation.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::rng::derived_stream;

/// Loss after `i` acquired labels, for `i = 0..=m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    losses: Vec<f64>,
    kind: LossKind,
}

impl LearningCurve {
    pub fn new(losses: Vec<f64>, kind: LossKind) -> Result<Self> {
        if losses.len() < 2 {
            return Err(Error::TooFewExamples {
                needed: 2,
                found: losses.len(),
            });
        }
        if losses.iter().any(|l| !l.is_finite()) {
            return Err(Error::BadSpec("learning curve has non-finite losses".into()));
        }
        Ok(Self { losses, kind })
    }

    pub fn error_rate(losses: Vec<f64>) -> Result<Self> {
        Self::new(losses, LossKind::ErrorRate)
    }

    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    /// Number of acquisitions `m`.
    pub fn steps(&self) -> usize {
        self.losses.len() - 1
    }

    pub fn initial(&self) -> f64 {
        self.losses[0]
    }

    pub fn last(&self) -> f64 {
        self.losses[self.losses.len() - 1]
    }
}

/// Ranks with ties averaged. Rank 1 is best.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankVector(pub Vec<f64>);

impl RankVector {
    pub fn ranks(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightScheme {
    Linear,
    Exponential {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
}

fn default_alpha() -> f64 {
    0.02
}

impl WeightScheme {
    pub fn exponential() -> Self {
        Self::Exponential {
            alpha: default_alpha(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Linear => "wi_linear",
            Self::Exponential { .. } => "wi_exponential",
        }
    }

    /// Weight of acquisition step `i` in `1..=m`.
    fn weight(&self, i: usize, m: usize) -> f64 {
        match *self {
            Self::Linear => (m - i + 1) as f64,
            Self::Exponential { alpha } => (-alpha * (i - 1) as f64).exp(),
        }
    }
}

/// Mean accuracy over the whole curve.
pub fn aua(curve: &LearningCurve) -> Result<f64> {
    if curve.kind != LossKind::ErrorRate {
        return Err(Error::WrongLossKind);
    }
    let n = curve.losses.len() as f64;
    Ok(curve.losses.iter().map(|l| 1.0 - l).sum::<f64>() / n)
}

/// Weighted mean of `baseline - curve` over the acquisition steps `1..=m`.
/// Step 0 is the same for every strategy and carries no weight.
pub fn weighted_improvement(
    curve: &LearningCurve,
    baseline: &LearningCurve,
    scheme: WeightScheme,
) -> Result<f64> {
    if curve.losses.len() != baseline.losses.len() {
        return Err(Error::LengthMismatch {
            left: curve.losses.len(),
            right: baseline.losses.len(),
        });
    }
    if let WeightScheme::Exponential { alpha } = scheme {
        if !(alpha > 0.0) {
            return Err(Error::BadSpec(format!("alpha {alpha} must be positive")));
        }
    }
    let m = curve.steps();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 1..=m {
        let w = scheme.weight(i, m);
        num += w * (baseline.losses[i] - curve.losses[i]);
        den += w;
    }
    Ok(num / den)
}

/// The first step whose loss is within `eps` percent of the final loss.
pub fn label_complexity(curve: &LearningCurve, eps: f64) -> usize {
    let threshold = (1.0 + eps / 100.0) * curve.last();
    curve
        .losses
        .iter()
        .position(|&l| l <= threshold)
        .unwrap_or(curve.steps())
}

/// Rank 1 for the best value; tied values share the mean of their ranks.
pub fn rank_methods(values: &[f64], higher_better: bool) -> RankVector {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let c = values[a].total_cmp(&values[b]);
        if higher_better {
            c.reverse()
        } else {
            c
        }
    });
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    RankVector(ranks)
}

/// Ranks of the mean ranks, lower mean first.
pub fn overall_rank(per_metric: &[RankVector]) -> Result<RankVector> {
    let first = per_metric
        .first()
        .ok_or_else(|| Error::ShapeMismatch("no rankings to aggregate".into()))?;
    let n = first.len();
    if let Some(r) = per_metric.iter().find(|r| r.len() != n) {
        return Err(Error::ShapeMismatch(format!(
            "rankings cover {n} and {} methods",
            r.len()
        )));
    }
    let means: Vec<f64> = (0..n)
        .map(|i| per_metric.iter().map(|r| r.0[i]).sum::<f64>() / per_metric.len() as f64)
        .collect();
    Ok(rank_methods(&means, false))
}

/// Pearson correlation of two samples.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::TooFewExamples {
            needed: 2,
            found: a.len(),
        });
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(sab / (saa * sbb).sqrt())
}

/// Spearman's correlation: Pearson on (tie-averaged) ranks.
pub fn spearman(a: &RankVector, b: &RankVector) -> Result<f64> {
    pearson(&a.0, &b.0)
}

/// Spearman's correlation of two raw score vectors.
pub fn spearman_scores(a: &[f64], b: &[f64]) -> Result<f64> {
    spearman(&rank_methods(a, true), &rank_methods(b, true))
}

/// Nonnegative spatial weights with a zero diagonal, stored by row.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialWeights {
    rows: Vec<Vec<(usize, f64)>>,
    total: f64,
}

impl SpatialWeights {
    fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let total: f64 = rows.iter().flatten().map(|(_, w)| w).sum();
        if !(total > 0.0) {
            return Err(Error::DegenerateWeights("all weights are zero".into()));
        }
        Ok(Self { rows, total })
    }

    /// Unit weights between 4-neighbours of a row-major `rows × cols` grid.
    pub fn rook_grid(rows: usize, cols: usize) -> Result<Self> {
        let idx = |r: usize, c: usize| r * cols + c;
        let mut out = vec![Vec::new(); rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                let me = idx(r, c);
                if r > 0 {
                    out[me].push((idx(r - 1, c), 1.0));
                }
                if c > 0 {
                    out[me].push((idx(r, c - 1), 1.0));
                }
                if c + 1 < cols {
                    out[me].push((idx(r, c + 1), 1.0));
                }
                if r + 1 < rows {
                    out[me].push((idx(r + 1, c), 1.0));
                }
            }
        }
        Self::from_rows(out)
    }

    /// Unit weights between consecutive points on a line.
    pub fn line(n: usize) -> Result<Self> {
        Self::rook_grid(1, n)
    }

    pub fn from_dense(w: &[Vec<f64>]) -> Result<Self> {
        let n = w.len();
        let mut rows = Vec::with_capacity(n);
        for (i, row) in w.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DegenerateWeights("matrix is not square".into()));
            }
            let mut r = Vec::new();
            for (j, &v) in row.iter().enumerate() {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::DegenerateWeights(format!("weight ({i}, {j}) = {v}")));
                }
                if i == j && v != 0.0 {
                    return Err(Error::DegenerateWeights("diagonal must be zero".into()));
                }
                if v > 0.0 {
                    r.push((j, v));
                }
            }
            rows.push(r);
        }
        Self::from_rows(rows)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn centred(values: &[f64], weights: &SpatialWeights) -> Result<(Vec<f64>, f64)> {
    if values.len() != weights.len() {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: weights.len(),
        });
    }
    if values.len() < 2 {
        return Err(Error::TooFewExamples {
            needed: 2,
            found: values.len(),
        });
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let z: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let ss: f64 = z.iter().map(|v| v * v).sum();
    if !(ss > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok((z, ss))
}

fn moran_of(z: &[f64], ss: f64, w: &SpatialWeights) -> f64 {
    let cross: f64 = w
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().map(|&(j, wij)| wij * z[i] * z[j]).sum::<f64>())
        .sum();
    z.len() as f64 / w.total * cross / ss
}

fn geary_of(z: &[f64], ss: f64, w: &SpatialWeights) -> f64 {
    let diff: f64 = w
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .map(|&(j, wij)| wij * (z[i] - z[j]).powi(2))
                .sum::<f64>()
        })
        .sum();
    (z.len() - 1) as f64 / (2.0 * w.total) * diff / ss
}

pub fn moran_i(values: &[f64], weights: &SpatialWeights) -> Result<f64> {
    let (z, ss) = centred(values, weights)?;
    Ok(moran_of(&z, ss, weights))
}

pub fn geary_c(values: &[f64], weights: &SpatialWeights) -> Result<f64> {
    let (z, ss) = centred(values, weights)?;
    Ok(geary_of(&z, ss, weights))
}

/// A statistic with its permutation null distribution summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PermutationTest {
    pub statistic: f64,
    /// One-sided p-value in the direction of positive autocorrelation.
    pub p_value: f64,
    pub null_mean: f64,
    pub null_sd: f64,
    pub permutations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialStatistic {
    Moran,
    Geary,
}

/// Permutation test: values are shuffled over the cells `permutations` times.
/// Each permutation has its own derived stream, so results do not depend on
/// thread count.
pub fn permutation_test(
    values: &[f64],
    weights: &SpatialWeights,
    statistic: SpatialStatistic,
    permutations: usize,
    seed: u64,
) -> Result<PermutationTest> {
    if permutations == 0 {
        return Err(Error::BadSpec("need at least one permutation".into()));
    }
    let (z, ss) = centred(values, weights)?;
    let stat = |z: &[f64]| match statistic {
        SpatialStatistic::Moran => moran_of(z, ss, weights),
        SpatialStatistic::Geary => geary_of(z, ss, weights),
    };
    let observed = stat(&z);
    let null: Vec<f64> = (0..permutations)
        .into_par_iter()
        .map(|b| {
            let mut rng = derived_stream(seed, &["perm", &b.to_string()]);
            let mut zb = z.clone();
            zb.shuffle(&mut rng);
            stat(&zb)
        })
        .collect();
    let extreme = null
        .iter()
        .filter(|&&s| match statistic {
            SpatialStatistic::Moran => s >= observed,
            SpatialStatistic::Geary => s <= observed,
        })
        .count();
    let b = permutations as f64;
    let mean = null.iter().sum::<f64>() / b;
    let var = null.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (b - 1.0).max(1.0);
    Ok(PermutationTest {
        statistic: observed,
        p_value: (extreme + 1) as f64 / (b + 1.0),
        null_mean: mean,
        null_sd: var.sqrt(),
        permutations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adjustment {
    Holm,
    Bonferroni,
}

/// Family-wise adjusted p-values, in input order.
pub fn adjust_pvalues(p: &[f64], method: Adjustment) -> Vec<f64> {
    let m = p.len() as f64;
    match method {
        Adjustment::Bonferroni => p.iter().map(|&v| (m * v).min(1.0)).collect(),
        Adjustment::Holm => {
            let mut order: Vec<usize> = (0..p.len()).collect();
            order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
            let mut out = vec![0.0; p.len()];
            let mut running = 0.0f64;
            for (rank, &i) in order.iter().enumerate() {
                let v = ((m - rank as f64) * p[i]).min(1.0);
                running = running.max(v);
                out[i] = running;
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(v: &[f64]) -> LearningCurve {
        LearningCurve::error_rate(v.to_vec()).unwrap()
    }

    #[test]
    fn aua_examples() {
        assert_eq!(aua(&curve(&[0.0, 0.0, 0.0])).unwrap(), 1.0);
        assert_eq!(aua(&curve(&[0.5, 0.5])).unwrap(), 0.5);
        assert!((aua(&curve(&[0.4, 0.2, 0.0])).unwrap() - 0.8).abs() < 1e-15);
        let log = LearningCurve::new(vec![0.1, 0.2], LossKind::LogLoss).unwrap();
        assert!(matches!(aua(&log), Err(Error::WrongLossKind)));
    }

    #[test]
    fn wi_examples() {
        let b = curve(&[0.5, 0.4, 0.3]);
        let c = curve(&[0.5, 0.3, 0.1]);
        assert_eq!(weighted_improvement(&b, &b, WeightScheme::Linear).unwrap(), 0.0);
        assert!((weighted_improvement(&c, &b, WeightScheme::Linear).unwrap() - 0.4 / 3.0).abs() < 1e-12);
        let shifted = curve(&[0.4, 0.3, 0.2]);
        for s in [WeightScheme::Linear, WeightScheme::exponential()] {
            assert!((weighted_improvement(&shifted, &b, s).unwrap() - 0.1).abs() < 1e-12);
            let ab = weighted_improvement(&c, &b, s).unwrap();
            let ba = weighted_improvement(&b, &c, s).unwrap();
            assert_eq!(ab, -ba);
        }
        assert!(matches!(
            weighted_improvement(&curve(&[0.1, 0.2]), &b, WeightScheme::Linear),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn label_complexity_examples() {
        assert_eq!(label_complexity(&curve(&[0.3, 0.3, 0.3]), 5.0), 0);
        assert_eq!(label_complexity(&curve(&[1.0, 0.5, 0.2, 0.2]), 5.0), 2);
        assert_eq!(label_complexity(&curve(&[0.4, 0.1, 0.0, 0.1, 0.0]), 5.0), 2);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_methods(&[3.0, 1.0, 2.0], true).0, vec![1.0, 3.0, 2.0]);
        assert_eq!(rank_methods(&[2.0, 2.0], true).0, vec![1.5, 1.5]);
        assert_eq!(rank_methods(&[7.0], false).0, vec![1.0]);
        let r = |v: &[f64]| RankVector(v.to_vec());
        assert_eq!(overall_rank(&[r(&[1.0, 2.0]), r(&[2.0, 1.0])]).unwrap().0, vec![1.5, 1.5]);
        assert_eq!(
            overall_rank(&[r(&[1.0, 2.0, 3.0]), r(&[1.0, 2.0, 3.0]), r(&[3.0, 1.0, 2.0])]).unwrap().0,
            vec![1.5, 1.5, 3.0]
        );
        assert!(matches!(overall_rank(&[r(&[1.0]), r(&[1.0, 2.0])]), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn spearman_examples() {
        let a = RankVector(vec![1.0, 2.0, 3.0, 4.0]);
        assert!((spearman(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!((spearman(&a, &RankVector(vec![4.0, 3.0, 2.0, 1.0])).unwrap() + 1.0).abs() < 1e-15);
        assert!((spearman(&a, &RankVector(vec![1.0, 3.0, 2.0, 4.0])).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn spatial_examples() {
        let w = SpatialWeights::rook_grid(2, 2).unwrap();
        assert_eq!(moran_i(&[1.0, 2.0, 3.0, 4.0], &w).unwrap(), 0.0);
        let w4 = SpatialWeights::rook_grid(4, 4).unwrap();
        let checker: Vec<f64> = (0..16).map(|i| ((i / 4 + i % 4) % 2) as f64).collect();
        assert!(moran_i(&checker, &w4).unwrap() < 0.0);
        assert!(matches!(moran_i(&[1.0; 4], &w), Err(Error::ZeroVariance)));
        assert!(matches!(geary_c(&[1.0; 4], &w), Err(Error::ZeroVariance)));
        let line = SpatialWeights::line(20).unwrap();
        let grad: Vec<f64> = (0..20).map(|i| i as f64).collect();
        assert!(geary_c(&grad, &line).unwrap() < 1.0);
        assert!(matches!(
            SpatialWeights::from_dense(&[vec![0.0, 0.0], vec![0.0, 0.0]]),
            Err(Error::DegenerateWeights(_))
        ));
    }

    #[test]
    fn adjust_examples() {
        assert_eq!(adjust_pvalues(&[0.3], Adjustment::Holm), vec![0.3]);
        assert_eq!(adjust_pvalues(&[0.01, 0.04], Adjustment::Bonferroni), vec![0.02, 0.08]);
        assert_eq!(adjust_pvalues(&[0.01, 0.04], Adjustment::Holm), vec![0.02, 0.04]);
        // Monotonicity: (0.03, 0.02, 0.5) sorted is (0.02, 0.03, 0.5) -> 0.06, 0.06, 0.5.
        assert_eq!(adjust_pvalues(&[0.03, 0.02, 0.5], Adjustment::Holm), vec![0.06, 0.06, 0.5]);
    }

    #[test]
    fn permutation_p_values_are_bounded() {
        let w = SpatialWeights::rook_grid(5, 5).unwrap();
        let smooth: Vec<f64> = (0..25).map(|i| (i / 5 + i % 5) as f64).collect();
        let t = permutation_test(&smooth, &w, SpatialStatistic::Moran, 199, 1).unwrap();
        assert_eq!(t.p_value, 1.0 / 200.0);
        let g = permutation_test(&smooth, &w, SpatialStatistic::Geary, 199, 1).unwrap();
        assert!(g.p_value >= 1.0 / 200.0 && g.p_value <= 1.0);
        assert!(g.statistic < 1.0);
    }
}
