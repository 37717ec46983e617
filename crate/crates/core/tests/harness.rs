//! The shipped configs and the command-line front end, at reduced scale.

use std::path::{Path, PathBuf};
use std::process::Command;

use graphon_lab::harness::{read_records, run_experiment, ExperimentConfig, ExperimentRecord};

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn load(name: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::load(configs_dir().join(name)).unwrap();
    cfg.output = None;
    cfg
}

fn strip_timing(records: &[ExperimentRecord]) -> Vec<ExperimentRecord> {
    records.iter().cloned().map(|mut r| {
        r.wall_clock_ms = 0.0;
        r
    }).collect()
}

#[test]
fn every_shipped_config_validates() {
    let mut count = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            ExperimentConfig::load(&path).unwrap().validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 8);
}

#[test]
fn small_oracle_scaling_is_reproducible() {
    let mut cfg = load("independence_scaling.json");
    cfg.n_values = vec![8, 16, 32];
    cfg.subset_sizes = vec![1, 2];
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(strip_timing(&a.records), strip_timing(&b.records));
    let rows: Vec<_> = a.records.iter().filter(|r| r.quantity == "subset_information").collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.windows(2).all(|w| (w[0].n, w[0].k) < (w[1].n, w[1].k)));
    for r in rows {
        assert!(r.entropy.unwrap() > 0.0 && r.fisher.unwrap() > 0.0 && r.bound.unwrap() > 0.0);
    }
    assert!(a.passed(), "{:?}", a.gates);
}

#[test]
fn zero_graphon_scaling_measures_nothing() {
    let mut cfg = load("independence_scaling.json");
    cfg.graphon = graphon_lab::harness::GraphonSpec::Constant { value: 0.0 };
    cfg.n_values = vec![4, 8];
    cfg.gates = Default::default();
    let outcome = run_experiment(&cfg).unwrap();
    for r in outcome.records.iter().filter(|r| r.quantity == "subset_information") {
        assert!(r.total().unwrap().abs() < 1e-12);
    }
}

#[test]
fn small_torus_stability_runs_with_refinement() {
    let mut cfg = load("torus_fisher_stability.json");
    cfg.grid_cells = 64;
    cfg.t_final = 0.1;
    cfg.epsilons = vec![0.08, 0.16, 0.32];
    cfg.gates.refinement_tolerance = Some(0.05);
    let outcome = run_experiment(&cfg).unwrap();
    let count = |q: &str| outcome.records.iter().filter(|r| r.quantity == q).count();
    assert_eq!(count("block_information"), 12);
    assert_eq!(count("refinement_delta"), 3);
    assert_eq!(count("hessian_monitor"), 4);
    let slope = outcome.records.iter().find(|r| r.quantity == "slope_total_in_epsilon").unwrap();
    assert!((1.6..=2.4).contains(&slope.slope.unwrap()), "{slope:?}");
}

#[test]
fn small_torus_scaling_reports_the_estimator_floor() {
    let mut cfg = load("torus_independence_scaling.json");
    cfg.n_values = vec![4, 8];
    cfg.replicas = 500;
    cfg.grid_cells = 64;
    cfg.t_final = 0.1;
    cfg.dt = Some(0.01);
    let outcome = run_experiment(&cfg).unwrap();
    let rows: Vec<_> = outcome.records.iter().filter(|r| r.quantity == "subset_information").collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.fisher.is_none() && r.entropy.unwrap() >= 0.0));
    assert_eq!(outcome.records.iter().filter(|r| r.quantity == "kde_noise_floor").count(), 2);
}

#[test]
fn small_estimator_validation() {
    let mut cfg = load("estimator_validation.json");
    cfg.samples = 5;
    cfg.replicas = 20_000;
    cfg.grid_cells = 128;
    cfg.t_final = 0.5;
    cfg.dt = Some(0.005);
    cfg.dt_values = vec![0.02, 0.01, 0.005];
    let outcome = run_experiment(&cfg).unwrap();
    let failed: Vec<_> = outcome.records.iter().filter(|r| r.passed == Some(false)).collect();
    assert!(failed.is_empty(), "{failed:?}");
    let slope = outcome.records.iter().find(|r| r.quantity == "slope_in_dt").unwrap().slope.unwrap();
    assert!((0.7..=1.3).contains(&slope), "{slope}");
}

#[test]
fn particle_densities_match_the_pde_before_relaxation() {
    // at short times the laws are far from uniform, so a wrong diffusion
    // coefficient shows up as a TV distance near 0.1
    let mut cfg = load("estimator_validation.json");
    cfg.samples = 2;
    cfg.replicas = 20_000;
    cfg.t_final = 0.05;
    cfg.dt_values = vec![0.004, 0.002, 0.001];
    let outcome = run_experiment(&cfg).unwrap();
    let rows: Vec<_> = outcome.records.iter().filter(|r| r.quantity == "kde_vs_pde").collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!(r.value.unwrap() < 0.02, "{r:?}");
    }
}

#[test]
fn operator_checks_pass() {
    let mut cfg = load("operator_checks.json");
    cfg.samples = 20;
    let outcome = run_experiment(&cfg).unwrap();
    assert!(outcome.passed(), "{:?}", outcome.gates);
    assert!(outcome.records.iter().any(|r| r.quantity == "hierarchy_ratio"));
}

fn cli(args: &[&str], dir: &Path) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_graphon-lab")).args(args).current_dir(dir).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn command_line_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let base = std::fs::read_to_string(configs_dir().join("oracle_entropy_stability.json")).unwrap();
    let mut cfg: serde_json::Value = serde_json::from_str(&base).unwrap();
    cfg["output"] = "out/run".into();
    std::fs::write(dir.path().join("good.json"), cfg.to_string()).unwrap();
    cfg["gates"]["slope_range"] = serde_json::json!([2.5, 3.0]);
    std::fs::write(dir.path().join("strict.json"), cfg.to_string()).unwrap();
    cfg["t_final"] = (-1.0).into();
    std::fs::write(dir.path().join("bad.json"), cfg.to_string()).unwrap();

    assert_eq!(cli(&["validate", "good.json"], dir.path()).0, 0);
    assert_eq!(cli(&["validate", "bad.json"], dir.path()).0, 1);
    let (code, stdout) = cli(&["run", "good.json"], dir.path());
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("PASS"));
    assert_eq!(cli(&["run", "strict.json"], dir.path()).0, 2);
    assert_eq!(cli(&["run", "bad.json"], dir.path()).0, 1);

    let csv = dir.path().join("out/run.csv");
    let jsonl = dir.path().join("out/run.jsonl");
    assert_eq!(read_records(&csv).unwrap(), read_records(&jsonl).unwrap());
    let (code, stdout) = cli(&["report", csv.to_str().unwrap()], dir.path());
    assert_eq!(code, 0);
    assert!(stdout.contains("slope_entropy_in_epsilon"));
}
