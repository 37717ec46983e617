//! Plain-text summaries of record files.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::experiments::GateResult;
use super::records::ExperimentRecord;

/// One line per fitted slope, ratio spread and refinement delta, plus row
/// counts and pass/fail tallies per quantity.
pub fn summarize(records: &[ExperimentRecord]) -> String {
    let mut out = String::new();
    let mut counts: BTreeMap<(&str, &str), (usize, usize, usize)> = BTreeMap::new();
    for r in records {
        let c = counts.entry((r.experiment.as_str(), r.quantity.as_str())).or_default();
        c.0 += 1;
        match r.passed {
            Some(true) => c.1 += 1,
            Some(false) => c.2 += 1,
            None => {}
        }
    }
    let _ = writeln!(out, "{:<22} {:<32} {:>6} {:>6} {:>6}", "experiment", "quantity", "rows", "pass", "fail");
    for ((experiment, quantity), (rows, pass, fail)) in &counts {
        let _ = writeln!(out, "{experiment:<22} {quantity:<32} {rows:>6} {pass:>6} {fail:>6}");
    }
    for r in records {
        if let (Some(slope), Some(r2)) = (r.slope, r.r_squared) {
            let k = r.k.map(|k| format!(" k={k}")).unwrap_or_default();
            let _ = writeln!(out, "{}{k}: slope {slope:.4}, R² {r2:.5} [{}]", r.quantity, r.regime);
        }
        if r.quantity == "ratio_spread" || r.quantity == "fitted_constant" {
            let _ = writeln!(out, "{}: {:.4e}", r.quantity, r.value.unwrap_or(f64::NAN));
        }
    }
    let deltas: Vec<f64> = records.iter().filter(|r| r.quantity == "refinement_delta").filter_map(|r| r.value).collect();
    if !deltas.is_empty() {
        let worst = deltas.iter().copied().fold(0.0, f64::max);
        let _ = writeln!(out, "grid refinement: largest relative change {worst:.3e}");
    }
    out
}

pub fn format_gates(gates: &[GateResult]) -> String {
    let mut out = String::new();
    for g in gates {
        let _ = writeln!(out, "{} {}: {}", if g.passed { "PASS" } else { "FAIL" }, g.name, g.detail);
    }
    out
}
