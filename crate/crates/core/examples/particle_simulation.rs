//! Euler-Maruyama simulation of the interacting particle system next to its
//! independent projection, checked against the closed-form Gaussian laws.
//!
//! cargo run --release --example particle_simulation

use graphon_lab::drift::DriftKernel;
use graphon_lab::gaussian::{evolve_interacting_gaussian, evolve_projection_gaussian, GaussianLaw, JointGaussianState};
use graphon_lab::graphon::{interaction_from_graphon, Graphon};
use graphon_lab::simulate::{
    empirical_moments, simulate_independent_projection, simulate_particle_system, EnsembleState, InitialLaw,
    SimConfig,
};

fn main() -> graphon_lab::Result<()> {
    let n = 6;
    let g = Graphon::new(vec![vec![1.0, 0.3], vec![0.3, 0.8]])?;
    let xi = interaction_from_graphon(&g, n)?;
    let kernel = DriftKernel::linear(1.0, 1)?;
    let laws: Vec<GaussianLaw> = (0..n).map(|i| GaussianLaw::scalar(i as f64 - 2.5, 0.5)).collect::<Result<_, _>>()?;
    let init = EnsembleState::sample(
        20_000,
        &laws.iter().cloned().map(InitialLaw::Gaussian).collect::<Vec<_>>(),
        kernel.domain(),
        11,
    )?;
    let cfg = SimConfig::new(1e-2, 1.0, 12)?;
    let interacting = empirical_moments(&simulate_particle_system(&xi, &kernel, &init, &cfg)?)?;
    let projected = empirical_moments(&simulate_independent_projection(&xi, &kernel, &init, &cfg)?)?;

    let exact = evolve_interacting_gaussian(&xi, 1.0, &JointGaussianState::from_product(&laws)?, 1.0, 1e-3)?;
    let exact_projection = evolve_projection_gaussian(&xi, 1.0, &laws, 1.0, 1e-3)?;
    println!("{:>3} {:>10} {:>10} {:>10} {:>10} {:>10}", "i", "mean", "exact", "var", "exact", "proj var");
    for i in 0..n {
        println!(
            "{i:>3} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} (exact {:.4})",
            interacting.means[i][0],
            exact.mean()[i],
            interacting.covariances[i][(0, 0)],
            exact.cov()[(i, i)],
            projected.covariances[i][(0, 0)],
            exact_projection[i].cov()[(0, 0)],
        );
    }
    println!(
        "Cov(X₁, X₂): simulated {:.4}, exact {:.4}; the projection keeps particles independent ({:.4})",
        interacting.joint_covariance[(0, 1)],
        exact.cov()[(0, 1)],
        projected.joint_covariance[(0, 1)]
    );
    Ok(())
}
