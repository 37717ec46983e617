//! The subset hierarchy `dz_v/dt = 𝒜z_v + C(v)`, the closed-form independence
//! bound it is compared with, and the comparison table across `N`.
//!
//! cargo run --release --example hierarchy

use graphon_lab::graphon::InteractionMatrix;
use graphon_lab::hierarchy::{
    comparison_check, independence_bound, prefix, solve_hierarchy_ode, source_term, ComparisonSettings,
    SubsetFunction,
};

fn main() -> graphon_lab::Result<()> {
    let xi = InteractionMatrix::uniform(4)?;
    println!("uniform ξ, N = 4: bound([2]) = {}", independence_bound(&xi, prefix(2))?);
    for k in 1..=4 {
        println!("  C([{k}]) = {:.6}", source_term(&xi, prefix(k))?);
    }

    // z starts at zero and is driven by the source term
    let z = solve_hierarchy_ode(&xi, &SubsetFunction::zeros(4)?, 1.0, 1.0, 1e-2)?;
    for k in 1..=4 {
        println!("  z_[{k}](1) = {:.6}", z.get(prefix(k)).unwrap());
    }

    let matrices: Vec<InteractionMatrix> =
        [4, 6, 8, 10, 12].iter().map(|&n| InteractionMatrix::uniform(n)).collect::<Result<_, _>>()?;
    let report = comparison_check(&matrices, &ComparisonSettings::default())?;
    println!("{:>4} {:>3} {:>12} {:>12} {:>8}", "N", "k", "z_[k](1)", "bound", "ratio");
    for row in report.rows.iter().filter(|r| r.k <= 3) {
        println!("{:>4} {:>3} {:>12.4e} {:>12.4e} {:>8.4}", row.n, row.k, row.z_value, row.bound, row.ratio);
    }
    if report.flags.is_empty() {
        println!("ratios stay within the allowed multiple across N");
    } else {
        report.flags.iter().for_each(|f| println!("flag: {f}"));
    }
    Ok(())
}
