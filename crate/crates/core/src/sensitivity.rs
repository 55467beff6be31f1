//! How much do Q^c rankings over a fixed grid depend on the labelled data?

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::classifiers::{train, ClassifierSpec};
use crate::data::LabeledSet;
use crate::error::{Error, Result};
use crate::loss::{estimate_expected_loss, LossSpec};
use crate::metrics::{
    adjust_pvalues, overall_rank, permutation_test, rank_methods, spearman, Adjustment,
    PermutationTest, RankVector, SpatialStatistic, SpatialWeights,
};
use crate::problems::{GaussianMixture, ProblemSpec};
use crate::rng::{derive_seed, stream};

pub const DEFAULT_MC_BUDGET: usize = 20_000;
pub const DEFAULT_PERMUTATIONS: usize = 999;

/// A lattice of candidate points, ids in row-major order (x varies fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridPool {
    rows: usize,
    cols: usize,
    points: Vec<Vec<f64>>,
}

impl GridPool {
    /// `n × n` points spanning `[lo, hi]²`.
    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::EmptyGrid);
        }
        let step = (hi - lo) / (n - 1) as f64;
        let axis: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
        let points = axis
            .iter()
            .flat_map(|&y| axis.iter().map(move |&x| vec![x, y]))
            .collect();
        Ok(Self {
            rows: n,
            cols: n,
            points,
        })
    }

    /// The 41 × 41 grid over `[-2.5, 2.5]²`.
    pub fn default_2d() -> Self {
        Self::square(-2.5, 2.5, 41).expect("valid default grid")
    }

    /// Points on a line, for one-dimensional problems.
    pub fn line(xs: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::EmptyGrid);
        }
        Ok(Self {
            rows: 1,
            cols: xs.len(),
            points: xs.iter().map(|&x| vec![x]).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> Result<SpatialWeights> {
        SpatialWeights::rook_grid(self.rows, self.cols)
    }
}

/// `Q^c` at every grid point, with the true posteriors of `problem` and losses
/// estimated on one fresh test sample of size `mc_budget`.
pub fn exact_qc_on_grid<R: Rng + ?Sized>(
    problem: &ProblemSpec,
    clf_spec: &ClassifierSpec,
    data: &LabeledSet,
    grid: &GridPool,
    loss: &LossSpec,
    mc_budget: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mixture = GaussianMixture::new(&problem.mixture()?)?;
    if mc_budget < 1000 {
        return Err(Error::BadSpec(format!("mc_budget {mc_budget} below 1000")));
    }
    if grid.dim() != mixture.dim() || data.dim() != mixture.dim() {
        return Err(Error::DimensionMismatch {
            expected: mixture.dim(),
            found: grid.dim(),
        });
    }
    let test = mixture.sample(mc_budget, rng)?;
    let before = estimate_expected_loss(loss, &train(clf_spec, data)?, &test)?;
    grid.points()
        .par_iter()
        .map(|x| {
            let p = mixture.posterior(x);
            let mut after = 0.0;
            for (j, &pj) in p.iter().enumerate() {
                if pj > 0.0 {
                    let model = train(clf_spec, &data.with_example(x, j)?)?;
                    after += pj * estimate_expected_loss(loss, &model, &test)?;
                }
            }
            Ok(before - after)
        })
        .collect()
}

/// The ranking of a grid's `Q^c` values (rank 1 = largest `Q^c`).
#[derive(Debug, Clone, PartialEq)]
pub struct RankMap {
    pub ranks: RankVector,
    pub qc: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct StudySettings {
    pub loss: LossSpec,
    pub mc_budget: usize,
    pub permutations: usize,
}

impl Default for StudySettings {
    fn default() -> Self {
        Self {
            loss: LossSpec::error_rate(),
            mc_budget: DEFAULT_MC_BUDGET,
            permutations: DEFAULT_PERMUTATIONS,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairwiseSpearman {
    pub a: usize,
    pub b: usize,
    pub rho: f64,
}

#[derive(Debug, Clone)]
pub struct RankStudy {
    pub maps: Vec<RankMap>,
    pub pairwise: Vec<PairwiseSpearman>,
    pub mean_spearman: f64,
    pub moran: Vec<PermutationTest>,
    pub geary: Vec<PermutationTest>,
    pub moran_holm: Vec<f64>,
    pub geary_holm: Vec<f64>,
    /// Rank of the mean rank of each grid point across the draws.
    pub averaged: RankVector,
}

/// Draws a labelled set of size `n_s` containing every class.
fn draw_labeled(problem: &ProblemSpec, mixture: &GaussianMixture, n_s: usize, seed: u64) -> Result<LabeledSet> {
    let mut rng = stream(seed);
    for _ in 0..crate::problems::MAX_SPLIT_RETRIES {
        let d = mixture.sample(n_s, &mut rng)?;
        if !d.class_counts().contains(&0) {
            return Ok(d);
        }
    }
    Err(Error::BadSpec(format!(
        "{} never produced every class in {n_s} draws",
        problem.name()
    )))
}

/// Runs the study with `n_draws` labelled sets derived from `seed`.
pub fn rank_similarity_study(
    problem: &ProblemSpec,
    clf_spec: &ClassifierSpec,
    grid: &GridPool,
    n_draws: usize,
    n_s: usize,
    settings: &StudySettings,
    seed: u64,
) -> Result<RankStudy> {
    let seeds: Vec<u64> = (0..n_draws)
        .map(|d| derive_seed(seed, &["draw", &d.to_string()]))
        .collect();
    rank_similarity_study_with_seeds(problem, clf_spec, grid, &seeds, n_s, settings)
}

/// Runs the study with one labelled set (and one test sample) per seed.
pub fn rank_similarity_study_with_seeds(
    problem: &ProblemSpec,
    clf_spec: &ClassifierSpec,
    grid: &GridPool,
    draw_seeds: &[u64],
    n_s: usize,
    settings: &StudySettings,
) -> Result<RankStudy> {
    if draw_seeds.len() < 2 {
        return Err(Error::BadSpec("need at least two draws".into()));
    }
    let mixture = GaussianMixture::new(&problem.mixture()?)?;
    let weights = grid.weights()?;
    let mut maps = Vec::with_capacity(draw_seeds.len());
    for &s in draw_seeds {
        let data = draw_labeled(problem, &mixture, n_s, s)?;
        let mut rng = stream(derive_seed(s, &["test sample"]));
        let qc = exact_qc_on_grid(problem, clf_spec, &data, grid, &settings.loss, settings.mc_budget, &mut rng)?;
        maps.push(RankMap {
            ranks: rank_methods(&qc, true),
            qc,
            seed: s,
        });
    }
    let mut pairwise = Vec::new();
    for a in 0..maps.len() {
        for b in a + 1..maps.len() {
            pairwise.push(PairwiseSpearman {
                a,
                b,
                rho: spearman(&maps[a].ranks, &maps[b].ranks)?,
            });
        }
    }
    let mean_spearman = pairwise.iter().map(|p| p.rho).sum::<f64>() / pairwise.len() as f64;
    let test = |m: &RankMap, stat, tag: &str| {
        permutation_test(
            &m.qc,
            &weights,
            stat,
            settings.permutations,
            derive_seed(m.seed, &[tag]),
        )
    };
    let moran = maps
        .iter()
        .map(|m| test(m, SpatialStatistic::Moran, "moran"))
        .collect::<Result<Vec<_>>>()?;
    let geary = maps
        .iter()
        .map(|m| test(m, SpatialStatistic::Geary, "geary"))
        .collect::<Result<Vec<_>>>()?;
    let p = |t: &[PermutationTest]| t.iter().map(|t| t.p_value).collect::<Vec<_>>();
    let moran_holm = adjust_pvalues(&p(&moran), Adjustment::Holm);
    let geary_holm = adjust_pvalues(&p(&geary), Adjustment::Holm);
    let averaged = overall_rank(&maps.iter().map(|m| m.ranks.clone()).collect::<Vec<_>>())?;
    Ok(RankStudy {
        maps,
        pairwise,
        mean_spearman,
        moran,
        geary,
        moran_holm,
        geary_holm,
        averaged,
    })
}

/// Writes `rank_map_<d>.csv` per draw, `rank_map_mean.csv` and `rank_stats.json`.
pub fn write_rank_study(dir: &Path, grid: &GridPool, study: &RankStudy) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let write_map = |name: &str, ranks: &RankVector, qc: Option<&[f64]>| -> Result<()> {
        let mut w = csv::Writer::from_path(dir.join(name))?;
        let mut header = vec!["id".to_string()];
        header.extend((1..=grid.dim()).map(|i| format!("x{i}")));
        header.push("rank".into());
        if qc.is_some() {
            header.push("qc".into());
        }
        w.write_record(&header)?;
        for (id, x) in grid.points().iter().enumerate() {
            let mut row = vec![id.to_string()];
            row.extend(x.iter().map(|v| v.to_string()));
            row.push(ranks.0[id].to_string());
            if let Some(q) = qc {
                row.push(q[id].to_string());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    };
    for (d, m) in study.maps.iter().enumerate() {
        write_map(&format!("rank_map_{d}.csv"), &m.ranks, Some(&m.qc))?;
    }
    write_map("rank_map_mean.csv", &study.averaged, None)?;
    #[derive(Serialize)]
    struct Stats<'a> {
        draw_seeds: Vec<u64>,
        mean_spearman: f64,
        pairwise: &'a [PairwiseSpearman],
        moran: &'a [PermutationTest],
        moran_holm: &'a [f64],
        geary: &'a [PermutationTest],
        geary_holm: &'a [f64],
    }
    let stats = Stats {
        draw_seeds: study.maps.iter().map(|m| m.seed).collect(),
        mean_spearman: study.mean_spearman,
        pairwise: &study.pairwise,
        moran: &study.moran,
        moran_holm: &study.moran_holm,
        geary: &study.geary,
        geary_holm: &study.geary_holm,
    };
    let mut f = std::fs::File::create(dir.join("rank_stats.json"))?;
    serde_json::to_writer_pretty(&mut f, &stats)?;
    writeln!(f)?;
    Ok(())
}
