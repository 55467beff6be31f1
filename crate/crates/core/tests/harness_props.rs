use std::path::Path;

use eqlab::classifiers::ClassifierSpec;
use eqlab::harness::{self, Cell, ExperimentConfig, ProblemEntry, RunRecord, SplitSizes};
use eqlab::problems::ProblemSpec;
use eqlab::strategies::{StrategyKind, StrategySpec};
use eqlab::LossSpec;

fn config(strategies: &[StrategyKind]) -> ExperimentConfig {
    ExperimentConfig {
        name: "harness test".into(),
        problems: vec![
            ProblemEntry::new(ProblemSpec::Ripley4, "theoretical"),
            ProblemEntry::new(ProblemSpec::GaussianPair { prior1: 0.5 }, "theoretical"),
        ],
        classifiers: vec![ClassifierSpec::knn(3)],
        strategies: strategies.iter().map(|&k| StrategySpec::new(k)).collect(),
        strategy_loss: LossSpec::error_rate(),
        split: SplitSizes {
            n_labeled: 8,
            n_pool: 20,
            n_test: Some(100),
        },
        seeds: vec![0, 1],
        global_seed: 3,
        subsample: None,
        budget: Some(10),
        label_complexity_eps: 5.0,
        wi_alpha: 0.02,
    }
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let c = config(&[StrategyKind::Rs, StrategyKind::Lc, StrategyKind::SimpleEq]);
    let dir = tempfile::tempdir().unwrap();
    harness::run_and_write(&c, 1, &dir.path().join("a")).unwrap();
    harness::run_and_write(&c, 4, &dir.path().join("b")).unwrap();
    let a = files(&dir.path().join("a"));
    assert!(a.iter().any(|(n, _)| n == "runs.csv"));
    assert_eq!(a, files(&dir.path().join("b")));
    let manifest = std::fs::read_to_string(dir.path().join("a/manifest.json")).unwrap();
    assert!(manifest.contains(&c.hash()));
}

#[test]
fn rs_has_zero_improvement_and_curves_are_error_rates() {
    let c = config(&[StrategyKind::Rs, StrategyKind::Se]);
    let records = harness::run_study(&c, 2).unwrap();
    assert_eq!(records.len(), 2 * 2 * 1 * 2);
    for r in &records {
        let l = r.losses.as_ref().unwrap();
        assert_eq!(l.len(), 11);
        assert!(l.iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(r.selected.len(), 10);
    }
    let agg = harness::aggregate(&records, &c).unwrap();
    for m in agg.per_problem.iter().filter(|m| m.strategy == "rs") {
        assert_eq!(m.values[1], 0.0);
        assert_eq!(m.values[2], 0.0);
    }
}

fn record(problem: &str, seed: u64, strategy: &str, losses: Vec<f64>) -> RunRecord {
    RunRecord {
        cell: Cell {
            problem: problem.into(),
            group: "theoretical".into(),
            classifier: "3-nn".into(),
            seed,
        },
        strategy: strategy.into(),
        losses: Some(losses),
        selected: Vec::new(),
        error: None,
        rng_seed: 0,
        wall_seconds: 0.0,
    }
}

#[test]
fn a_dominant_strategy_ranks_first() {
    let c = config(&[StrategyKind::Rs, StrategyKind::Lc, StrategyKind::Se]);
    let mut records = Vec::new();
    for problem in ["ripley4", "gaussian_pair"] {
        for seed in [0, 1] {
            records.push(record(problem, seed, "rs", vec![0.5, 0.4, 0.35, 0.3]));
            records.push(record(problem, seed, "lc", vec![0.5, 0.3, 0.2, 0.1]));
            records.push(record(problem, seed, "se", vec![0.5, 0.45, 0.4, 0.38]));
        }
    }
    let agg = harness::aggregate(&records, &c).unwrap();
    assert_eq!(agg.tables.len(), 1);
    let t = &agg.tables[0];
    assert_eq!(t.strategies, ["rs", "lc", "se"]);
    assert_eq!(t.overall.0, [2.0, 1.0, 3.0]);
}

#[test]
fn aggregate_needs_random_sampling() {
    let c = config(&[StrategyKind::Lc, StrategyKind::Se]);
    assert!(harness::aggregate(&[], &c).is_err());
}

#[test]
fn config_round_trips_through_json() {
    let c = config(&[StrategyKind::Rs, StrategyKind::PartitionEq]);
    let text = serde_json::to_string(&c).unwrap();
    let back = ExperimentConfig::from_json(&text).unwrap();
    assert_eq!(back.hash(), c.hash());
    let mut bad = c.clone();
    bad.budget = Some(0);
    assert!(bad.validate().is_err());
}
