use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use eqlab::analytic::{self, AnalyticClassifier, GaussianPairProblem, QmVariance};
use eqlab::classifiers::ClassifierSpec;
use eqlab::harness::{run_and_write, ExperimentConfig};
use eqlab::problems::ProblemSpec;
use eqlab::sensitivity::{rank_similarity_study, write_rank_study, GridPool, StudySettings};
use eqlab::LossSpec;

#[derive(Parser)]
#[command(name = "eqlab", version, about = "Expected-loss-reduction active learning laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every strategy on a single (problem, classifier, seed) cell.
    Run(RunArgs),
    /// Run the full factorial study in a config and aggregate it.
    Study(StudyArgs),
    /// Write Q^c, Q^m, SE and RS curves for the univariate Gaussian problem.
    Analytic(AnalyticArgs),
    /// Rank maps of Q^c over a grid for several labelled draws.
    Ranks(RanksArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Acquisitions per run (default: until the pool is empty).
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Problem name (default: the first in the config).
    #[arg(long)]
    problem: Option<String>,
    /// Classifier name, e.g. `5-nn` (default: the first in the config).
    #[arg(long)]
    classifier: Option<String>,
    /// Seed (default: the first in the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct StudyArgs {
    #[command(flatten)]
    common: Common,
    /// Use seeds 0..N instead of the config's list.
    #[arg(long)]
    seeds: Option<u64>,
}

#[derive(Args)]
struct AnalyticArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 18)]
    n: usize,
    #[arg(long, default_value_t = -0.9, allow_hyphen_values = true)]
    mu1: f64,
    #[arg(long, default_value_t = 1.1, allow_hyphen_values = true)]
    mu2: f64,
    #[arg(long, default_value_t = 0.5)]
    prior1: f64,
    #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
    lo: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    hi: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
}

#[derive(Args)]
struct RanksArgs {
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON file with any of the fields below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Deserialize)]
#[serde(default)]
struct RanksConfig {
    problem: ProblemSpec,
    classifier: ClassifierSpec,
    draws: usize,
    n_s: usize,
    grid_n: usize,
    lo: f64,
    hi: f64,
    mc_budget: usize,
    permutations: usize,
    seed: u64,
}

impl Default for RanksConfig {
    fn default() -> Self {
        Self {
            problem: ProblemSpec::Ripley4,
            classifier: ClassifierSpec::qda(),
            draws: 4,
            n_s: 20,
            grid_n: 41,
            lo: -2.5,
            hi: 2.5,
            mc_budget: eqlab::sensitivity::DEFAULT_MC_BUDGET,
            permutations: eqlab::sensitivity::DEFAULT_PERMUTATIONS,
            seed: 0,
        }
    }
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

fn load_config(common: &Common) -> CliResult<ExperimentConfig> {
    let mut config = ExperimentConfig::load(&common.config)?;
    if common.budget.is_some() {
        config.budget = common.budget;
    }
    Ok(config)
}

fn finish(config: &ExperimentConfig, jobs: usize, out: &Path) -> CliResult<()> {
    config.validate()?;
    let (records, agg) = run_and_write(config, jobs, out)?;
    let failed = records.iter().filter(|r| r.losses.is_none()).count();
    println!(
        "{} runs ({} failed), {} aggregate tables -> {}",
        records.len(),
        failed,
        agg.map_or(0, |a| a.tables.len()),
        out.display()
    );
    Ok(())
}

fn run(args: RunArgs) -> CliResult<()> {
    let mut config = load_config(&args.common)?;
    if let Some(p) = &args.problem {
        config.problems.retain(|e| &e.name() == p);
    } else {
        config.problems.truncate(1);
    }
    if let Some(c) = &args.classifier {
        config.classifiers.retain(|s| &s.name() == c);
    } else {
        config.classifiers.truncate(1);
    }
    config.seeds = vec![args.seed.unwrap_or(config.seeds[0])];
    finish(&config, args.common.jobs, &args.common.out)
}

fn study(args: StudyArgs) -> CliResult<()> {
    let mut config = load_config(&args.common)?;
    if let Some(n) = args.seeds {
        config.seeds = (0..n).collect();
    }
    finish(&config, args.common.jobs, &args.common.out)
}

fn write_rows(path: &Path, header: &str, rows: impl Iterator<Item = Vec<f64>>) -> CliResult<()> {
    let mut text = String::from(header);
    text.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn analytic_cmd(a: AnalyticArgs) -> CliResult<()> {
    std::fs::create_dir_all(&a.out)?;
    let prob = GaussianPairProblem::with_prior(a.prior1)?;
    let clf = AnalyticClassifier::new(a.mu1, a.mu2, a.n)?;
    let grid = analytic::grid(a.lo, a.hi, a.step)?;
    let curve = analytic::qc_curve(&clf, &prob, &grid)?;
    write_rows(
        &a.out.join("qc.csv"),
        "x,qc",
        grid.iter().zip(&curve.values).map(|(&x, &q)| vec![x, q]),
    )?;
    if prob.is_balanced() {
        let rows = grid
            .iter()
            .map(|&x| {
                Ok(vec![
                    x,
                    analytic::qm(a.n, x)?,
                    analytic::qm_with(&prob, a.n, x, QmVariance::Published)?,
                ])
            })
            .collect::<eqlab::Result<Vec<_>>>()?;
        write_rows(&a.out.join("qm.csv"), "x,qm,qm_published", rows.into_iter())?;
    }
    // SE scores the entropy of the estimated posterior.
    let se = |x: f64| {
        let d = 0.5 * ((x - clf.mu[1]).powi(2) - (x - clf.mu[0]).powi(2));
        let p = 1.0 / (1.0 + (-d).exp());
        -[p, 1.0 - p]
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|v| v * v.ln())
            .sum::<f64>()
    };
    write_rows(
        &a.out.join("se_rs.csv"),
        "x,se_score,rs_density",
        grid.iter().map(|&x| vec![x, se(x), analytic::rs_density(&prob, x)]),
    )?;
    let (x_star, q_star) = analytic::optimal_on_grid(&clf, &prob, &grid)?;
    let x_se = analytic::se_selection(&clf);
    let summary = serde_json::json!({
        "mu": clf.mu,
        "n": a.n,
        "prior1": a.prior1,
        "error_loss": analytic::error_loss(&clf, &prob),
        "x_star": x_star,
        "qc_x_star": q_star,
        "se_selection": x_se,
        "regret_se": analytic::regret(&clf, &prob, x_se, &grid)?,
    });
    std::fs::write(a.out.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    println!("x_* = {x_star}, Q^c(x_*) = {q_star:.6} -> {}", a.out.display());
    Ok(())
}

fn ranks(a: RanksArgs) -> CliResult<()> {
    let mut rc: RanksConfig = match &a.config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => RanksConfig::default(),
    };
    if let Some(s) = a.seed {
        rc.seed = s;
    }
    if let Some(d) = a.draws {
        rc.draws = d;
    }
    let grid = if rc.problem.mixture()?.classes[0][0].mean.len() == 1 {
        GridPool::line(&analytic::grid(rc.lo, rc.hi, (rc.hi - rc.lo) / (rc.grid_n - 1) as f64)?)?
    } else {
        GridPool::square(rc.lo, rc.hi, rc.grid_n)?
    };
    let settings = StudySettings {
        loss: LossSpec::error_rate(),
        mc_budget: rc.mc_budget,
        permutations: rc.permutations,
    };
    let pool = eqlab::harness::thread_pool(a.jobs.unwrap_or(0))?;
    let study = pool.install(|| {
        rank_similarity_study(&rc.problem, &rc.classifier, &grid, rc.draws, rc.n_s, &settings, rc.seed)
    })?;
    write_rank_study(&a.out, &grid, &study)?;
    println!(
        "mean pairwise Spearman {:.4}; Holm-adjusted Moran p-values {:?} -> {}",
        study.mean_spearman,
        study.moran_holm,
        a.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Study(a) => study(a),
        Command::Analytic(a) => analytic_cmd(a),
        Command::Ranks(a) => ranks(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
