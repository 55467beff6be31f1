//! Iterated active learning, replicated studies and rank aggregation.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifiers::{train, ClassifierSpec};
use crate::data::LabeledSet;
use crate::error::{Error, Result};
use crate::loss::{estimate_expected_loss, LossSpec};
use crate::metrics::{
    aua, label_complexity, overall_rank, rank_methods, weighted_improvement, LearningCurve,
    RankVector, WeightScheme,
};
use crate::problems::{generate, load_csv, split, DatasetBundle, ProblemSpec};
use crate::rng::{derive_seed, derived_stream};
use crate::strategies::{score_pool, select, StrategyKind, StrategySpec};

pub const DEFAULT_TEST_SIZE: usize = 500;

fn default_group() -> String {
    "theoretical".into()
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

fn default_eps() -> f64 {
    5.0
}

fn default_alpha() -> f64 {
    0.02
}

/// One problem in a study, tagged with the group it is aggregated in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemEntry {
    /// Defaults to the problem kind's name.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default = "default_group")]
    pub group: String,
    pub problem: ProblemSpec,
}

impl ProblemEntry {
    pub fn new(problem: ProblemSpec, group: &str) -> Self {
        Self {
            name: None,
            group: group.into(),
            problem,
        }
    }

    pub fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.problem.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub n_labeled: usize,
    pub n_pool: usize,
    /// Defaults to 500, or every remaining row of a CSV dataset if fewer.
    #[serde(default)]
    pub n_test: Option<usize>,
}

/// A factorial study: problems × classifiers × strategies × seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub problems: Vec<ProblemEntry>,
    pub classifiers: Vec<ClassifierSpec>,
    pub strategies: Vec<StrategySpec>,
    /// Loss used inside the expected-loss strategies. Learning curves always
    /// record the test error rate.
    #[serde(default)]
    pub strategy_loss: LossSpec,
    pub split: SplitSizes,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub global_seed: u64,
    /// Overrides every strategy's pool sub-sample size.
    #[serde(default)]
    pub subsample: Option<usize>,
    /// Acquisitions per run; `None` runs until the pool is empty.
    #[serde(default)]
    pub budget: Option<usize>,
    #[serde(default = "default_eps")]
    pub label_complexity_eps: f64,
    #[serde(default = "default_alpha")]
    pub wi_alpha: f64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    /// Reads a config file. Relative CSV paths are taken from the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut c = Self::from_json(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for e in &mut c.problems {
            if let ProblemSpec::Csv { path: p, .. } = &mut e.problem {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.problems.is_empty() {
            return bad("no problems".into());
        }
        if self.classifiers.is_empty() {
            return bad("no classifiers".into());
        }
        if self.strategies.is_empty() {
            return bad("no strategies".into());
        }
        if self.seeds.is_empty() {
            return bad("no seeds".into());
        }
        let distinct = |names: Vec<String>, what: &str| -> Result<()> {
            let set: BTreeSet<&String> = names.iter().collect();
            if set.len() != names.len() {
                return bad(format!("duplicate {what} names: {names:?}"));
            }
            Ok(())
        };
        distinct(self.problems.iter().map(ProblemEntry::name).collect(), "problem")?;
        distinct(self.classifiers.iter().map(ClassifierSpec::name).collect(), "classifier")?;
        distinct(self.strategies.iter().map(|s| s.name().to_string()).collect(), "strategy")?;
        distinct(self.seeds.iter().map(u64::to_string).collect(), "seed")?;
        for c in &self.classifiers {
            c.validate()?;
        }
        for s in self.strategies() {
            s.validate()?;
        }
        if self.strategy_loss.floor <= 0.0 || self.strategy_loss.floor > 1e-3 {
            return bad(format!("loss floor {} not in (0, 1e-3]", self.strategy_loss.floor));
        }
        if self.split.n_labeled == 0 || self.split.n_pool == 0 {
            return bad("n_labeled and n_pool must be positive".into());
        }
        if let Some(b) = self.budget {
            if b == 0 {
                return bad("budget must be at least 1 for learning-curve metrics".into());
            }
            if b > self.split.n_pool {
                return bad(format!("budget {b} exceeds pool size {}", self.split.n_pool));
            }
        }
        if !(self.wi_alpha > 0.0) {
            return bad("wi_alpha must be positive".into());
        }
        Ok(())
    }

    /// Strategies with the config-wide sub-sample size applied.
    pub fn strategies(&self) -> Vec<StrategySpec> {
        self.strategies
            .iter()
            .map(|s| {
                let mut s = s.clone();
                if let Some(n) = self.subsample {
                    s.subsample = n;
                }
                s
            })
            .collect()
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        hex(&Sha256::digest(json.as_bytes()))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Coordinates of one run.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Cell {
    pub problem: String,
    pub group: String,
    pub classifier: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub cell: Cell,
    pub strategy: String,
    /// Test error after `0..=m` acquisitions; `None` when the run failed.
    pub losses: Option<Vec<f64>>,
    pub selected: Vec<usize>,
    pub error: Option<String>,
    pub rng_seed: u64,
    pub wall_seconds: f64,
}

/// The result of one iterated run before it is tied to a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub losses: Vec<f64>,
    pub selected: Vec<usize>,
    pub labeled_sizes: Vec<usize>,
}

fn test_error(clf: &ClassifierSpec, labeled: &LabeledSet, test: &LabeledSet) -> Result<f64> {
    estimate_expected_loss(&LossSpec::error_rate(), &train(clf, labeled)?, test)
}

/// Trains, records the test error, acquires one label, and repeats. The loss
/// after each acquisition is measured after retraining on the enlarged set.
pub fn run_iterated_al<R: Rng + ?Sized>(
    bundle: &DatasetBundle,
    clf_spec: &ClassifierSpec,
    strategy: &StrategySpec,
    loss: &LossSpec,
    budget: Option<usize>,
    rng: &mut R,
) -> Result<RunTrace> {
    let budget = budget.unwrap_or(bundle.pool.len());
    if budget > bundle.pool.len() {
        return Err(Error::NotEnoughData {
            requested: budget,
            available: bundle.pool.len(),
        });
    }
    let mut labeled = bundle.labeled.clone();
    let mut pool = bundle.pool.clone();
    let mut losses = vec![test_error(clf_spec, &labeled, &bundle.test)?];
    let mut selected = Vec::with_capacity(budget);
    let mut labeled_sizes = vec![labeled.len()];
    for _ in 0..budget {
        let scores = score_pool(strategy, clf_spec, &labeled, &pool, loss, rng)?;
        let id = select(&scores, rng)?;
        let (x, y) = pool.take(id).ok_or(Error::EmptyScoreVector)?;
        labeled.push(x, y)?;
        selected.push(id);
        labeled_sizes.push(labeled.len());
        losses.push(test_error(clf_spec, &labeled, &bundle.test)?);
    }
    Ok(RunTrace {
        losses,
        selected,
        labeled_sizes,
    })
}

/// Builds the shared data bundle for a (problem, seed) pair.
pub fn make_bundle(config: &ExperimentConfig, entry: &ProblemEntry, seed: u64) -> Result<DatasetBundle> {
    let s = config.split;
    let split_seed = derive_seed(config.global_seed, &["split", &entry.name(), &seed.to_string()]);
    match &entry.problem {
        ProblemSpec::Csv { path, label_column } => {
            let data = load_csv(path, label_column)?;
            let rest = data.len().saturating_sub(s.n_labeled + s.n_pool);
            let n_test = s.n_test.unwrap_or(DEFAULT_TEST_SIZE.min(rest));
            split(&data, split_seed, s.n_labeled, s.n_pool, n_test)
        }
        spec => {
            let n_test = s.n_test.unwrap_or(DEFAULT_TEST_SIZE);
            let total = s.n_labeled + s.n_pool + n_test;
            let mut rng = derived_stream(config.global_seed, &["data", &entry.name(), &seed.to_string()]);
            let data = generate(spec, total, &mut rng)?;
            split(&data, split_seed, s.n_labeled, s.n_pool, n_test)
        }
    }
}

/// Seed of the stream owned by one run.
pub fn run_seed(config: &ExperimentConfig, cell: &Cell, strategy: &str) -> u64 {
    derive_seed(
        config.global_seed,
        &["run", &cell.problem, &cell.classifier, &cell.seed.to_string(), strategy],
    )
}

/// Runs the full factorial on `jobs` worker threads (`0` = all cores). Within a
/// (problem, classifier, seed) cell every strategy sees the same bundle.
/// Failed runs are kept as records with no curve.
pub fn run_study(config: &ExperimentConfig, jobs: usize) -> Result<Vec<RunRecord>> {
    config.validate()?;
    thread_pool(jobs)?.install(|| run_study_inner(config))
}

pub use rayon::ThreadPool;

/// A worker pool with `jobs` threads (`0` = one per core).
pub fn thread_pool(jobs: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
}

fn run_study_inner(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    let strategies = config.strategies();
    let bundles: Vec<(usize, u64, Result<DatasetBundle>)> = config
        .problems
        .iter()
        .enumerate()
        .flat_map(|(p, entry)| config.seeds.iter().map(move |&s| (p, s, entry)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(p, s, entry)| (p, s, make_bundle(config, entry, s)))
        .collect();
    let mut jobs = Vec::new();
    for (p, seed, bundle) in &bundles {
        let entry = &config.problems[*p];
        for clf in &config.classifiers {
            for strat in &strategies {
                let cell = Cell {
                    problem: entry.name(),
                    group: entry.group.clone(),
                    classifier: clf.name(),
                    seed: *seed,
                };
                jobs.push((cell, clf, strat, bundle));
            }
        }
    }
    Ok(jobs
        .into_par_iter()
        .map(|(cell, clf, strat, bundle)| {
            let rng_seed = run_seed(config, &cell, strat.name());
            let start = Instant::now();
            let result = match bundle {
                Ok(b) => {
                    let mut rng = crate::rng::stream(rng_seed);
                    run_iterated_al(b, clf, strat, &config.strategy_loss, config.budget, &mut rng)
                }
                Err(e) => Err(Error::BadSpec(format!("bundle: {e}"))),
            };
            let wall_seconds = start.elapsed().as_secs_f64();
            let (losses, selected, error) = match result {
                Ok(t) => (Some(t.losses), t.selected, None),
                Err(e) => {
                    log::warn!(
                        "run {}/{}/{}/seed {} failed: {e}",
                        cell.problem,
                        cell.classifier,
                        strat.name(),
                        cell.seed
                    );
                    (None, Vec::new(), Some(e.to_string()))
                }
            };
            RunRecord {
                strategy: strat.name().to_string(),
                cell,
                losses,
                selected,
                error,
                rng_seed,
                wall_seconds,
            }
        })
        .collect())
}

pub const METRICS: [&str; 4] = ["aua", "wi_linear", "wi_exponential", "label_complexity"];

/// Seed-averaged metric values for one strategy on one (problem, classifier).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemMetrics {
    pub problem: String,
    pub group: String,
    pub classifier: String,
    pub strategy: String,
    pub runs: usize,
    /// In [`METRICS`] order.
    pub values: [f64; 4],
    pub ranks: [f64; 4],
}

/// Ranks for one (classifier, group).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateTable {
    pub classifier: String,
    pub group: String,
    pub strategies: Vec<String>,
    /// Mean over the group's problems of each strategy's per-problem rank.
    pub mean_ranks: [Vec<f64>; 4],
    /// `mean_ranks` re-ranked per metric.
    pub metric_ranks: [RankVector; 4],
    pub overall: RankVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub per_problem: Vec<ProblemMetrics>,
    pub tables: Vec<AggregateTable>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Per-cell metrics against the cell's rs curve, averaged over seeds, ranked
/// per problem, then averaged over the problems of each group.
pub fn aggregate(records: &[RunRecord], config: &ExperimentConfig) -> Result<Aggregate> {
    let strategies: Vec<String> = config.strategies.iter().map(|s| s.name().to_string()).collect();
    let rs = StrategyKind::Rs.name();
    if !strategies.iter().any(|s| s == rs) {
        return Err(Error::MissingBaseline("the config has no rs strategy".into()));
    }
    let scheme_lin = WeightScheme::Linear;
    let scheme_exp = WeightScheme::Exponential {
        alpha: config.wi_alpha,
    };
    // (problem, classifier, strategy) -> per-seed metric rows.
    let mut by_cell: BTreeMap<(String, String, u64), BTreeMap<String, LearningCurve>> = BTreeMap::new();
    for r in records {
        if let Some(l) = &r.losses {
            by_cell
                .entry((r.cell.problem.clone(), r.cell.classifier.clone(), r.cell.seed))
                .or_default()
                .insert(r.strategy.clone(), LearningCurve::error_rate(l.clone())?);
        }
    }
    let mut per_problem = Vec::new();
    for entry in &config.problems {
        let problem = entry.name();
        for clf in &config.classifiers {
            let classifier = clf.name();
            let mut rows: Vec<Option<([f64; 4], usize)>> = Vec::new();
            let mut any_baseline = false;
            for strat in &strategies {
                let mut acc: Vec<[f64; 4]> = Vec::new();
                for &seed in &config.seeds {
                    let Some(curves) = by_cell.get(&(problem.clone(), classifier.clone(), seed)) else {
                        continue;
                    };
                    let (Some(curve), Some(base)) = (curves.get(strat), curves.get(rs)) else {
                        continue;
                    };
                    any_baseline = true;
                    acc.push([
                        aua(curve)?,
                        weighted_improvement(curve, base, scheme_lin)?,
                        weighted_improvement(curve, base, scheme_exp)?,
                        label_complexity(curve, config.label_complexity_eps) as f64,
                    ]);
                }
                if acc.is_empty() {
                    log::warn!("{problem}/{classifier}/{strat}: no usable runs, left out of the ranks");
                    rows.push(None);
                } else {
                    let m = std::array::from_fn(|k| mean(&acc.iter().map(|a| a[k]).collect::<Vec<_>>()));
                    rows.push(Some((m, acc.len())));
                }
            }
            if !any_baseline {
                return Err(Error::MissingBaseline(format!("{problem}/{classifier}")));
            }
            let present: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].is_some()).collect();
            let mut ranks = vec![[f64::NAN; 4]; rows.len()];
            for k in 0..4 {
                let vals: Vec<f64> = present.iter().map(|&i| rows[i].unwrap().0[k]).collect();
                // Label complexity: fewer labels is better.
                let r = rank_methods(&vals, k != 3);
                for (pos, &i) in present.iter().enumerate() {
                    ranks[i][k] = r.0[pos];
                }
            }
            for (i, strat) in strategies.iter().enumerate() {
                if let Some((values, runs)) = rows[i] {
                    per_problem.push(ProblemMetrics {
                        problem: problem.clone(),
                        group: entry.group.clone(),
                        classifier: classifier.clone(),
                        strategy: strat.clone(),
                        runs,
                        values,
                        ranks: ranks[i],
                    });
                }
            }
        }
    }
    let groups: BTreeSet<&String> = config.problems.iter().map(|p| &p.group).collect();
    let mut tables = Vec::new();
    for clf in &config.classifiers {
        let classifier = clf.name();
        for group in &groups {
            let rows: Vec<&ProblemMetrics> = per_problem
                .iter()
                .filter(|m| &m.classifier == &classifier && &&m.group == group)
                .collect();
            if rows.is_empty() {
                continue;
            }
            let included: Vec<String> = strategies
                .iter()
                .filter(|s| rows.iter().any(|m| &m.strategy == *s))
                .cloned()
                .collect();
            let mean_ranks: [Vec<f64>; 4] = std::array::from_fn(|k| {
                included
                    .iter()
                    .map(|s| {
                        mean(
                            &rows
                                .iter()
                                .filter(|m| &m.strategy == s)
                                .map(|m| m.ranks[k])
                                .collect::<Vec<_>>(),
                        )
                    })
                    .collect()
            });
            let metric_ranks: [RankVector; 4] =
                std::array::from_fn(|k| rank_methods(&mean_ranks[k], false));
            let overall = overall_rank(&metric_ranks)?;
            tables.push(AggregateTable {
                classifier: classifier.clone(),
                group: (*group).clone(),
                strategies: included,
                mean_ranks,
                metric_ranks,
                overall,
            });
        }
    }
    Ok(Aggregate {
        per_problem,
        tables,
    })
}

/// File-name-safe version of a label.
pub fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

/// Writes one CSV per learning curve, the run summary, the per-problem
/// metrics, one CSV per aggregate table, a manifest, and (outside the CSVs)
/// wall-clock timings. Every CSV depends only on the config.
pub fn write_outputs(
    dir: &Path,
    config: &ExperimentConfig,
    records: &[RunRecord],
    aggregate: Option<&Aggregate>,
) -> Result<Vec<PathBuf>> {
    let curves_dir = dir.join("curves");
    std::fs::create_dir_all(&curves_dir)?;
    let mut written = Vec::new();
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by(|a, b| (&a.cell, &a.strategy).cmp(&(&b.cell, &b.strategy)));

    for r in &sorted {
        let Some(losses) = &r.losses else { continue };
        let path = curves_dir.join(format!(
            "{}__{}__{}__seed{}.csv",
            slug(&r.cell.problem),
            slug(&r.cell.classifier),
            slug(&r.strategy),
            r.cell.seed
        ));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["iteration", "labels", "loss", "selected_id"])?;
        for (i, l) in losses.iter().enumerate() {
            let sel = if i == 0 { String::new() } else { r.selected[i - 1].to_string() };
            w.write_record([
                i.to_string(),
                (config.split.n_labeled + i).to_string(),
                l.to_string(),
                sel,
            ])?;
        }
        w.flush()?;
        written.push(path);
    }

    let path = dir.join("runs.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record([
        "problem", "group", "classifier", "strategy", "seed", "status", "iterations",
        "initial_loss", "final_loss", "rng_seed", "error",
    ])?;
    for r in &sorted {
        let (status, iters, first, last) = match &r.losses {
            Some(l) => (
                "ok",
                (l.len() - 1).to_string(),
                l[0].to_string(),
                l[l.len() - 1].to_string(),
            ),
            None => ("failed", String::new(), String::new(), String::new()),
        };
        w.write_record([
            r.cell.problem.as_str(),
            &r.cell.group,
            &r.cell.classifier,
            &r.strategy,
            &r.cell.seed.to_string(),
            status,
            &iters,
            &first,
            &last,
            &r.rng_seed.to_string(),
            r.error.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush()?;
    written.push(path);

    if let Some(agg) = aggregate {
        let path = dir.join("metrics_per_problem.csv");
        let mut w = csv::Writer::from_path(&path)?;
        let mut header = vec!["classifier", "group", "problem", "strategy", "runs"];
        header.extend(METRICS);
        let rank_names: Vec<String> = METRICS.iter().map(|m| format!("rank_{m}")).collect();
        header.extend(rank_names.iter().map(String::as_str));
        w.write_record(&header)?;
        for m in &agg.per_problem {
            let mut row = vec![
                m.classifier.clone(),
                m.group.clone(),
                m.problem.clone(),
                m.strategy.clone(),
                m.runs.to_string(),
            ];
            row.extend(m.values.iter().map(|v| fmt(*v)));
            row.extend(m.ranks.iter().map(|v| fmt(*v)));
            w.write_record(&row)?;
        }
        w.flush()?;
        written.push(path);

        for t in &agg.tables {
            let path = dir.join(format!("table__{}__{}.csv", slug(&t.classifier), slug(&t.group)));
            let mut w = csv::Writer::from_path(&path)?;
            let mut header = vec!["strategy".to_string()];
            header.extend(METRICS.iter().map(|m| format!("mean_rank_{m}")));
            header.extend(METRICS.iter().map(|m| format!("rank_{m}")));
            header.push("overall_rank".into());
            w.write_record(&header)?;
            for (i, s) in t.strategies.iter().enumerate() {
                let mut row = vec![s.clone()];
                row.extend((0..4).map(|k| fmt(t.mean_ranks[k][i])));
                row.extend((0..4).map(|k| fmt(t.metric_ranks[k].0[i])));
                row.push(fmt(t.overall.0[i]));
                w.write_record(&row)?;
            }
            w.flush()?;
            written.push(path);
        }
    }

    #[derive(Serialize)]
    struct Manifest<'a> {
        name: &'a str,
        config_hash: String,
        eqlab_version: &'a str,
        runs: usize,
        failed_runs: usize,
        outputs: Vec<String>,
        config: &'a ExperimentConfig,
    }
    let manifest = Manifest {
        name: &config.name,
        config_hash: config.hash(),
        eqlab_version: env!("CARGO_PKG_VERSION"),
        runs: records.len(),
        failed_runs: records.iter().filter(|r| r.losses.is_none()).count(),
        outputs: written
            .iter()
            .map(|p| p.strip_prefix(dir).unwrap_or(p).display().to_string())
            .collect(),
        config,
    };
    let mut f = std::fs::File::create(dir.join("manifest.json"))?;
    serde_json::to_writer_pretty(&mut f, &manifest)?;
    writeln!(f)?;

    let timings: Vec<_> = sorted
        .iter()
        .map(|r| {
            serde_json::json!({
                "problem": r.cell.problem,
                "classifier": r.cell.classifier,
                "strategy": r.strategy,
                "seed": r.cell.seed,
                "wall_seconds": r.wall_seconds,
            })
        })
        .collect();
    let mut f = std::fs::File::create(dir.join("timings.json"))?;
    serde_json::to_writer_pretty(&mut f, &timings)?;
    writeln!(f)?;
    Ok(written)
}

/// Runs, aggregates (when an rs baseline is present) and writes a study.
pub fn run_and_write(config: &ExperimentConfig, jobs: usize, out: &Path) -> Result<(Vec<RunRecord>, Option<Aggregate>)> {
    let records = run_study(config, jobs)?;
    let has_rs = config.strategies.iter().any(|s| s.kind == StrategyKind::Rs);
    let agg = if has_rs {
        Some(aggregate(&records, config)?)
    } else {
        log::warn!("no rs strategy: skipping aggregate tables");
        None
    };
    write_outputs(out, config, &records, agg.as_ref())?;
    Ok((records, agg))
}
