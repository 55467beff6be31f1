//! The twelve acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use eqlab::analytic::{self, AnalyticClassifier, GaussianPairProblem};
use eqlab::classifiers::ClassifierSpec;
use eqlab::harness::{self, ExperimentConfig, ProblemEntry, SplitSizes};
use eqlab::metrics::{self, Adjustment, LearningCurve, RankVector, SpatialWeights, WeightScheme};
use eqlab::problems::{GaussianMixture, ProblemSpec};
use eqlab::sensitivity::{rank_similarity_study, GridPool, StudySettings};
use eqlab::strategies::{
    draw_partition, efelc_score, partition_eq_score_with, score_pool, simple_eq_score,
    StrategyKind, StrategySpec,
};
use eqlab::{LabeledSet, LossSpec, Pool};
use rand::Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn balanced() -> GaussianPairProblem {
    GaussianPairProblem::balanced()
}

fn clf(a: f64, b: f64) -> AnalyticClassifier {
    AnalyticClassifier::new(a, b, 18).unwrap()
}

fn ac1() -> Outcome {
    let p = balanced();
    let l = analytic::error_loss(&clf(-1.0, 1.0), &p);
    let mut worst = 0.0f64;
    let mut rng = eqlab::rng::stream(1);
    for _ in 0..1000 {
        let a = rng.random_range(-3.0..3.0);
        let b = rng.random_range(-3.0..3.0);
        let s = analytic::error_loss(&clf(a, b), &p) + analytic::error_loss(&clf(b, a), &p);
        worst = worst.max((s - 1.0).abs());
    }
    check(
        (l - 0.158_655_3).abs() < 1e-6 && worst <= 1e-12,
        format!("L_e(-1,1) = {l:.7}; max |L(a,b)+L(b,a)-1| = {worst:.1e}"),
    )
}

fn ac2() -> Outcome {
    let g = analytic::grid(-4.0, 4.0, 0.01).unwrap();
    let c = clf(-1.1, 1.1);
    let max = g.iter().map(|&x| analytic::qc(&c, &balanced(), x)).fold(f64::NEG_INFINITY, f64::max);
    check(max < 0.0, format!("max Q^c over {} grid points = {max:.3e}", g.len()))
}

fn ac3() -> Outcome {
    let g = analytic::grid(-4.0, 4.0, 0.01).unwrap();
    let mut parts = Vec::new();
    let mut ok = true;
    for (a, b) in [(-0.5, 1.5), (-0.9, 1.1)] {
        let (x, v) = analytic::optimal_on_grid(&clf(a, b), &balanced(), &g).unwrap();
        ok &= v > 0.0 && x < 0.0;
        parts.push(format!("mu=({a},{b}): x_* = {x}, Q^c = {v:.5}"));
    }
    check(ok, parts.join("; "))
}

fn ac4() -> Outcome {
    let c = clf(-0.9, 1.1);
    let p = balanced();
    let mut worst_qc = 0.0f64;
    let mut worst_qm = 0.0f64;
    for (i, x) in [-2.0, -1.0, 0.0, 1.0, 2.0].into_iter().enumerate() {
        let o = analytic::qc_oracle(&c, &p, x, 1_000_000, 100 + i as u64);
        worst_qc = worst_qc.max((analytic::qc(&c, &p, x) - o.mean).abs() / o.se);
        let o = analytic::qm_oracle(&p, 18, x, 100_000, 200 + i as u64).unwrap();
        worst_qm = worst_qm.max((analytic::qm(18, x).unwrap() - o.mean).abs() / o.se);
    }
    check(
        worst_qc <= 3.0 && worst_qm <= 3.0,
        format!("largest |closed form - oracle| / SE: qc {worst_qc:.2}, qm {worst_qm:.2}"),
    )
}

fn ac5() -> Outcome {
    let q0 = analytic::qm(18, 0.0).unwrap();
    let g = analytic::grid(-4.0, 4.0, 0.01).unwrap();
    let asym = g
        .iter()
        .map(|&x| (analytic::qm(18, x).unwrap() - analytic::qm(18, -x).unwrap()).abs())
        .fold(0.0, f64::max);
    check(q0 > 0.0 && asym < 1e-9, format!("qm(18,0) = {q0:.3e}; max asymmetry {asym:.1e}"))
}

fn ac6() -> Outcome {
    let mut rng = eqlab::rng::stream(6);
    let mut exact = true;
    for _ in 0..100 {
        let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        exact &= analytic::se_selection(&clf(a, b)) == (a + b) / 2.0;
    }
    let g = analytic::grid(-4.0, 4.0, 0.01).unwrap();
    let c = clf(1.0, -1.0);
    let p = balanced();
    let r_se = analytic::regret(&c, &p, analytic::se_selection(&c), &g).unwrap();
    let r_lo = analytic::regret(&c, &p, -4.0, &g).unwrap();
    let r_hi = analytic::regret(&c, &p, 4.0, &g).unwrap();
    check(
        exact && r_se > r_lo && r_se > r_hi,
        format!("se_selection exact on 100 pairs: {exact}; regret SE {r_se:.5} vs x=-4 {r_lo:.5}, x=4 {r_hi:.5}"),
    )
}

fn ac7() -> Outcome {
    let config = ExperimentConfig {
        name: "learning-curve sanity".into(),
        problems: vec![ProblemEntry::new(ProblemSpec::Ripley4, "theoretical")],
        classifiers: vec![ClassifierSpec::knn(5)],
        strategies: StrategyKind::ALL.iter().map(|&k| StrategySpec::new(k)).collect(),
        strategy_loss: LossSpec::error_rate(),
        split: SplitSizes {
            n_labeled: 10,
            n_pool: 150,
            n_test: Some(500),
        },
        seeds: (0..10).collect(),
        global_seed: 7,
        subsample: None,
        budget: None,
        label_complexity_eps: 5.0,
        wi_alpha: 0.02,
    };
    let records = harness::run_study(&config, 0).map_err(|e| e.to_string())?;
    if let Some(r) = records.iter().find(|r| r.losses.is_none()) {
        return Err(format!("run {} seed {} failed: {:?}", r.strategy, r.cell.seed, r.error));
    }
    let curves = |s: &str| -> Vec<&Vec<f64>> {
        records.iter().filter(|r| r.strategy == s).map(|r| r.losses.as_ref().unwrap()).collect()
    };
    let mean = |v: Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let first_last = |s: &str| {
        let c = curves(s);
        (mean(c.iter().map(|l| l[0]).collect()), mean(c.iter().map(|l| l[l.len() - 1]).collect()))
    };
    let (rs0, rs1) = first_last("rs");
    let (se0, se1) = first_last("se");
    let mut same_final = true;
    for seed in 0..10 {
        let finals: Vec<f64> = records
            .iter()
            .filter(|r| r.cell.seed == seed)
            .map(|r| *r.losses.as_ref().unwrap().last().unwrap())
            .collect();
        same_final &= finals.iter().all(|&f| f == finals[0]);
    }
    let aua = |s: &str| {
        mean(curves(s).iter().map(|l| metrics::aua(&LearningCurve::error_rate(l.to_vec()).unwrap()).unwrap()).collect())
    };
    let (a_se, a_rs) = (aua("se"), aua("rs"));
    check(
        rs1 < rs0 && se1 < se0 && same_final && a_se >= a_rs - 0.02,
        format!(
            "rs {rs0:.3} -> {rs1:.3}, se {se0:.3} -> {se1:.3}; identical finals across 8 strategies: {same_final}; AUA se {a_se:.4} vs rs {a_rs:.4}"
        ),
    )
}

fn ac8() -> Outcome {
    let study = rank_similarity_study(
        &ProblemSpec::Ripley4,
        &ClassifierSpec::qda(),
        &GridPool::default_2d(),
        4,
        20,
        &StudySettings::default(),
        8,
    )
    .map_err(|e| e.to_string())?;
    let max_p = study.moran_holm.iter().copied().fold(0.0, f64::max);
    check(
        study.mean_spearman > 0.3 && max_p < 0.05,
        format!(
            "mean pairwise Spearman {:.3}; Moran I {:?}; largest Holm-adjusted p {max_p:.4}",
            study.mean_spearman,
            study.moran.iter().map(|t| (t.statistic * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        ),
    )
}

fn ac9() -> Outcome {
    let fixtures = common::fixtures();
    let loss = LossSpec::error_rate();
    let mut worst = 0.0f64;
    let mut evaluations = 0;
    let models = [(1, false), (1, true), (3, true)];
    for (fi, f) in fixtures.iter().enumerate() {
        let d = common::labeled(&f.d);
        let pool_pts: Vec<Vec<f64>> = f.pool.iter().map(|&u| vec![u]).collect();
        let plan = draw_partition(&d, &mut eqlab::rng::stream(fi as u64)).unwrap();
        let part = |idx: &[usize]| idx.iter().map(|&i| f.d[i]).collect::<Vec<_>>();
        for &(k, smoothing) in &models {
            let spec = ClassifierSpec::Knn { k, smoothing };
            for &x in &f.pool {
                let pairs = [
                    (efelc_score(&[x], &spec, &d, &pool_pts), common::efelc_oracle(&f.d, &f.pool, k, smoothing, x)),
                    (simple_eq_score(&[x], &spec, &d, &loss), common::simple_eq_oracle(&f.d, k, smoothing, x)),
                    (
                        partition_eq_score_with(&[x], &spec, &spec, &d, &loss, std::slice::from_ref(&plan)),
                        common::partition_eq_oracle(&part(&plan.calib), &part(&plan.train), &part(&plan.eval), k, smoothing, x),
                    ),
                ];
                for (got, want) in pairs {
                    let got = got.map_err(|e| e.to_string())?;
                    worst = worst.max((got - want).abs());
                    evaluations += 1;
                }
            }
        }
    }
    check(
        worst <= 1e-12,
        format!("{} fixtures, {evaluations} score comparisons, max |diff| = {worst:.1e}", fixtures.len()),
    )
}

fn ac10() -> Outcome {
    let c = |v: &[f64]| LearningCurve::error_rate(v.to_vec()).unwrap();
    let r = |v: &[f64]| RankVector(v.to_vec());
    let mut failures = Vec::new();
    let mut t = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };
    t("aua 0", metrics::aua(&c(&[0.0, 0.0])).unwrap() == 1.0);
    t("aua 0.5", metrics::aua(&c(&[0.5, 0.5, 0.5])).unwrap() == 0.5);
    t("aua 0.8", (metrics::aua(&c(&[0.4, 0.2, 0.0])).unwrap() - 0.8).abs() < 1e-15);
    let base = c(&[0.5, 0.4, 0.3]);
    t("wi self", metrics::weighted_improvement(&base, &base, WeightScheme::Linear).unwrap() == 0.0);
    for s in [WeightScheme::Linear, WeightScheme::exponential()] {
        t("wi shift", (metrics::weighted_improvement(&c(&[0.4, 0.3, 0.2]), &base, s).unwrap() - 0.1).abs() < 1e-12);
    }
    t(
        "wi 0.1333",
        (metrics::weighted_improvement(&c(&[0.5, 0.3, 0.1]), &base, WeightScheme::Linear).unwrap() - 0.4 / 3.0).abs() < 1e-12,
    );
    t("lc const", metrics::label_complexity(&c(&[0.2, 0.2, 0.2]), 5.0) == 0);
    t("lc 2", metrics::label_complexity(&c(&[1.0, 0.5, 0.2, 0.2]), 5.0) == 2);
    t("lc zero", metrics::label_complexity(&c(&[0.3, 0.1, 0.0, 0.0]), 5.0) == 2);
    t("rank", metrics::rank_methods(&[3.0, 1.0, 2.0], true).0 == vec![1.0, 3.0, 2.0]);
    t("rank ties", metrics::rank_methods(&[2.0, 2.0], true).0 == vec![1.5, 1.5]);
    t("rank single", metrics::rank_methods(&[4.0], true).0 == vec![1.0]);
    t("overall same", metrics::overall_rank(&[r(&[1.0, 2.0, 3.0]), r(&[1.0, 2.0, 3.0])]).unwrap().0 == vec![1.0, 2.0, 3.0]);
    t("overall tie", metrics::overall_rank(&[r(&[1.0, 2.0]), r(&[2.0, 1.0])]).unwrap().0 == vec![1.5, 1.5]);
    t(
        "overall three",
        metrics::overall_rank(&[r(&[1.0, 2.0, 3.0]), r(&[1.0, 2.0, 3.0]), r(&[3.0, 1.0, 2.0])]).unwrap().0 == vec![1.5, 1.5, 3.0],
    );
    let a = r(&[1.0, 2.0, 3.0, 4.0]);
    t("spearman 1", (metrics::spearman(&a, &a).unwrap() - 1.0).abs() < 1e-15);
    t("spearman -1", (metrics::spearman(&a, &r(&[4.0, 3.0, 2.0, 1.0])).unwrap() + 1.0).abs() < 1e-15);
    t("spearman 0.8", (metrics::spearman(&a, &r(&[1.0, 3.0, 2.0, 4.0])).unwrap() - 0.8).abs() < 1e-12);
    let w = SpatialWeights::rook_grid(2, 2).unwrap();
    // Independent script value for the 2x2 fixture: sum_ij w_ij z_i z_j = 0, so I = 0.
    t("moran 2x2", metrics::moran_i(&[1.0, 2.0, 3.0, 4.0], &w).unwrap() == 0.0);
    let w4 = SpatialWeights::rook_grid(4, 4).unwrap();
    let checker: Vec<f64> = (0..16).map(|i| ((i / 4 + i % 4) % 2) as f64).collect();
    t("moran checker", metrics::moran_i(&checker, &w4).unwrap() < 0.0);
    t("moran const", metrics::moran_i(&[2.0; 4], &w).is_err());
    t("geary line", metrics::geary_c(&(0..10).map(f64::from).collect::<Vec<_>>(), &SpatialWeights::line(10).unwrap()).unwrap() < 1.0);
    t("geary const", metrics::geary_c(&[2.0; 4], &w).is_err());
    t("p single", metrics::adjust_pvalues(&[0.2], Adjustment::Holm) == vec![0.2]);
    t("bonferroni", metrics::adjust_pvalues(&[0.01, 0.04], Adjustment::Bonferroni) == vec![0.02, 0.08]);
    t("holm", metrics::adjust_pvalues(&[0.01, 0.04], Adjustment::Holm) == vec![0.02, 0.04]);
    let holm = metrics::adjust_pvalues(&[0.04, 0.01, 0.03], Adjustment::Holm);
    // Sorted 0.01, 0.03, 0.04 -> 0.03, 0.06, max(0.06, 0.04) = 0.06.
    t("holm 3", holm.iter().zip([0.06, 0.03, 0.06]).all(|(a, b)| (a - b).abs() < 1e-15));
    check(failures.is_empty(), if failures.is_empty() { "27 metric examples exact".into() } else { format!("failed: {failures:?}") })
}

fn ac11() -> Outcome {
    let problem = ProblemSpec::GaussianPair { prior1: 0.5 };
    let mixture = GaussianMixture::new(&problem.mixture().unwrap()).unwrap();
    let spec = ClassifierSpec::unit_gaussian(None);
    let exact = balanced();
    let mut rhos = Vec::new();
    for seed in 0..20u64 {
        let mut rng = eqlab::rng::derived_stream(11, &["estimator signal", &seed.to_string()]);
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for class in 0..2 {
            for _ in 0..9 {
                pts.push(mixture.sample_class(class, &mut rng));
                labels.push(class);
            }
        }
        let d = LabeledSet::new(pts, labels, 2).unwrap();
        let pool_pts: Vec<Vec<f64>> = (0..50).map(|_| mixture.sample_one(&mut rng).0).collect();
        let pool = Pool::from_points(pool_pts.clone()).unwrap();
        let scores = score_pool(
            &StrategySpec::new(StrategyKind::PartitionEq),
            &spec,
            &d,
            &pool,
            &LossSpec::error_rate(),
            &mut rng,
        )
        .map_err(|e| e.to_string())?;
        let mu: Vec<f64> = (0..2)
            .map(|c| d.iter().filter(|(_, y)| *y == c).map(|(x, _)| x[0]).sum::<f64>() / 9.0)
            .collect();
        let a = AnalyticClassifier::new(mu[0], mu[1], 18).unwrap();
        let truth: Vec<f64> = scores.ids.iter().map(|&id| analytic::qc(&a, &exact, pool_pts[id][0])).collect();
        rhos.push(metrics::spearman_scores(&scores.scores, &truth).map_err(|e| e.to_string())?);
    }
    let mean = rhos.iter().sum::<f64>() / rhos.len() as f64;
    check(mean > 0.0, format!("mean Spearman(partitionEQ, exact Q^c) over 20 seeds = {mean:.3}"))
}

fn ac12() -> Outcome {
    let config = ExperimentConfig {
        name: "reproducibility".into(),
        problems: vec![
            ProblemEntry::new(ProblemSpec::Ripley4, "theoretical"),
            ProblemEntry::new(ProblemSpec::GaussianTriangles, "theoretical"),
        ],
        classifiers: vec![ClassifierSpec::knn(5), ClassifierSpec::lda()],
        strategies: StrategyKind::ALL.iter().map(|&k| StrategySpec::new(k)).collect(),
        strategy_loss: LossSpec::error_rate(),
        split: SplitSizes {
            n_labeled: 10,
            n_pool: 30,
            n_test: Some(200),
        },
        seeds: vec![0, 1, 2],
        global_seed: 12,
        subsample: Some(20),
        budget: Some(15),
        label_complexity_eps: 5.0,
        wi_alpha: 0.02,
    };
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut listings = Vec::new();
    for jobs in [1, 3, 8] {
        let out = dir.path().join(format!("jobs{jobs}"));
        harness::run_and_write(&config, jobs, &out).map_err(|e| e.to_string())?;
        listings.push(csv_contents(&out));
    }
    let identical = listings.windows(2).all(|w| w[0] == w[1]);
    check(
        identical && !listings[0].is_empty(),
        format!("{} CSV files byte-identical across --jobs 1, 3, 8: {identical}", listings[0].len()),
    )
}

fn csv_contents(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 12] = [
        ("analytic loss", Duration::from_secs(1), ac1),
        ("Q^c < 0 everywhere for (-1.1, 1.1)", Duration::from_secs(1), ac2),
        ("x_* < 0 with positive Q^c", Duration::from_secs(1), ac3),
        ("closed forms agree with Monte Carlo", Duration::from_secs(120), ac4),
        ("Q^m positive at 0 and symmetric", Duration::from_secs(1), ac5),
        ("SE picks t-hat and has the worst regret", Duration::from_secs(5), ac6),
        ("learning-curve sanity", Duration::from_secs(300), ac7),
        ("rank-similarity study", Duration::from_secs(600), ac8),
        ("brute-force oracle equivalence", Duration::from_secs(10), ac9),
        ("metrics suite", Duration::from_secs(1), ac10),
        ("estimator signal", Duration::from_secs(300), ac11),
        ("reproducibility across --jobs", Duration::from_secs(600), ac12),
    ];
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let over = elapsed > *budget;
        let (tag, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d} (took {:.1}s, limit {}s)", elapsed.as_secs_f64(), budget.as_secs())),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} [{tag}] {name}: {detail} [{:.2}s]", i + 1, elapsed.as_secs_f64());
    }
    println!("acceptance: {} of 12 criteria passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
