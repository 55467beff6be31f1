use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn eqlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eqlab")).args(args).output().unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn csvs(dir: &Path) -> Vec<(String, Vec<u8>)> {
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
fn analytic_writes_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = eqlab(&["analytic", "--out", out, "--mu1", "-0.5", "--mu2", "1.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let qc = std::fs::read_to_string(dir.path().join("qc.csv")).unwrap();
    assert!(qc.starts_with("x,qc\n-4,"));
    assert_eq!(qc.lines().count(), 802);
    let qm = std::fs::read_to_string(dir.path().join("qm.csv")).unwrap();
    assert!(qm.starts_with("x,qm,qm_published\n"));
    assert!(dir.path().join("se_rs.csv").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["x_star"], -4.0);
    assert_eq!(summary["se_selection"], 0.5);
}

#[test]
fn study_is_deterministic_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("smoke.json");
    let mut listings = Vec::new();
    for jobs in ["1", "4"] {
        let out = dir.path().join(jobs);
        let o = eqlab(&["study", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", jobs]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        listings.push(csvs(&out));
    }
    assert!(listings[0].iter().any(|(n, _)| n.starts_with("table__")));
    assert_eq!(listings[0], listings[1]);
}

#[test]
fn run_selects_one_cell() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("smoke.json");
    let out = dir.path().join("cell");
    let o = eqlab(&[
        "run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(),
        "--problem", "gaussian_pair", "--classifier", "lda", "--seed", "5", "--budget", "4",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let runs = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 6);
    assert!(runs.lines().skip(1).all(|l| l.contains("gaussian_pair") && l.contains(",5,")));
}

#[test]
fn csv_problem_paths_are_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("csv_example.json");
    let o = eqlab(&["study", "--config", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--seeds", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bad_configs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"problems": [], "classifiers": [{"kind": "lda"}], "strategies": [{"kind": "rs"}], "split": {"n_labeled": 4, "n_pool": 4}}"#).unwrap();
    let out = dir.path().join("out");
    let o = eqlab(&["study", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));

    std::fs::write(&bad, "{ not json").unwrap();
    assert!(!eqlab(&["study", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.success());

    let missing = eqlab(&["run", "--config", "/nonexistent.json", "--out", out.to_str().unwrap()]);
    assert!(!missing.status.success());
}

#[test]
fn ranks_on_a_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ranks.json");
    std::fs::write(
        &cfg,
        r#"{"problem": {"kind": "ripley4"}, "classifier": {"kind": "lda"}, "draws": 2, "n_s": 12, "grid_n": 6, "mc_budget": 2000, "permutations": 99}"#,
    )
    .unwrap();
    let out = dir.path().join("ranks");
    let o = eqlab(&["ranks", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["rank_map_0.csv", "rank_map_1.csv", "rank_map_mean.csv", "rank_stats.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
}
