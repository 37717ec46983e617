//! Sensitivity of the graphon mean-field system to the graphon: an oracle
//! perturbation sweep run through the experiment harness.
//!
//! cargo run --release --example graphon_stability [config.json]
//!
//! Without an argument the sweep below is used; any file from `configs/`
//! can be passed instead.

use graphon_lab::harness::{format_gates, run_experiment, summarize, ExperimentConfig};

const SWEEP: &str = r#"{
    "kind": "fisher_stability",
    "label": "two-block sweep",
    "regime": "oracle",
    "graphon": {"type": "step", "values": [[0.6, 0.3], [0.3, 0.5]]},
    "perturbation": [[1.0, -0.5], [-0.5, 1.0]],
    "kernel": {"kind": "linear_difference", "rate": 1.0},
    "initial": {"type": "gaussian", "means": [-1.0, 1.0], "variance": 0.5},
    "epsilons": [0.025, 0.05, 0.1, 0.2],
    "t_final": 1.0,
    "dt": 0.01,
    "gates": {"slope_range": [1.7, 2.3]}
}"#;

fn main() -> graphon_lab::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::from_json_str(SWEEP)?,
    };
    let outcome = run_experiment(&cfg)?;
    for r in outcome.records.iter().filter(|r| r.quantity == "sup_over_blocks") {
        println!(
            "ε = {:<6} d² = {:.4e}  sup_u H = {:.4e}  sup_u (H + I) = {:.4e}",
            r.epsilon.unwrap(),
            r.distance_sq.unwrap(),
            r.entropy.unwrap(),
            r.value.unwrap()
        );
    }
    print!("{}", summarize(&outcome.records));
    print!("{}", format_gates(&outcome.gates));
    Ok(())
}
