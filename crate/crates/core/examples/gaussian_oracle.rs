//! Closed-form laws of the linear interacting system and its independent
//! projection, and the decay of `H + I` on small subsets as `N` grows.
//!
//! cargo run --release --example gaussian_oracle

use graphon_lab::gaussian::{
    evolve_interacting_gaussian, evolve_projection_gaussian, subset_info, GaussianLaw, JointGaussianState,
};
use graphon_lab::graphon::{interaction_from_graphon, Graphon, InteractionMatrix};
use graphon_lab::hierarchy::independence_bound_indices;

fn main() -> graphon_lab::Result<()> {
    // two particles pulled together at rate 1/2 each: Var(X₁ − X₂)(t) = 1 − e^{−2t}
    let xi = InteractionMatrix::from_rows(vec![vec![0.0, 0.5], vec![0.5, 0.0]])?;
    let joint = evolve_interacting_gaussian(&xi, 1.0, &JointGaussianState::deterministic(2, 1, &[0.0, 0.0])?, 1.0, 1e-2)?;
    let c = joint.cov();
    println!(
        "Var(X₁ − X₂)(1) = {:.8}, 1 − e^(−2) = {:.8}",
        c[(0, 0)] + c[(1, 1)] - 2.0 * c[(0, 1)],
        1.0 - (-2.0f64).exp()
    );

    // dense graphon G ≡ 1: H + I of the first two particles against N
    let g = Graphon::constant(1.0)?;
    println!("{:>5} {:>12} {:>12} {:>12} {:>10}", "N", "H", "I", "bound", "(H+I)N²/4");
    for n in [16, 32, 64, 128] {
        let xi = interaction_from_graphon(&g, n)?;
        let init = vec![GaussianLaw::scalar(0.0, 1.0)?; n];
        let joint = evolve_interacting_gaussian(&xi, 1.0, &JointGaussianState::from_product(&init)?, 1.0, 1e-2)?;
        let projection = evolve_projection_gaussian(&xi, 1.0, &init, 1.0, 1e-2)?;
        let info = subset_info(&joint, &projection, &[0, 1])?;
        println!(
            "{n:>5} {:>12.4e} {:>12.4e} {:>12.4e} {:>10.4}",
            info.entropy,
            info.fisher,
            independence_bound_indices(&xi, &[0, 1])?,
            info.total() * (n * n) as f64 / 4.0
        );
    }
    Ok(())
}
