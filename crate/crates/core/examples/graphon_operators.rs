//! Step graphons, the matrices they induce, distances between graphons and
//! the exponential of the graphon integral operator.
//!
//! cargo run --release --example graphon_operators

use graphon_lab::graphon::{
    cut_norm_exact, cut_norm_lower_bound, dist_sup_l1, interaction_from_graphon, kernel_apply,
    kernel_exponential_apply, sample_bernoulli_matrix, Graphon, GridFunction, StepKernel,
};

fn main() -> graphon_lab::Result<()> {
    // two-community graphon: dense inside communities, sparse across
    let g = Graphon::new(vec![vec![0.9, 0.2], vec![0.2, 0.7]])?;
    let xi = interaction_from_graphon(&g, 8)?;
    println!("ξ for N = 8 (row sums ≤ 1):");
    for i in 0..xi.n() {
        let row: Vec<String> = xi.row(i).iter().map(|v| format!("{v:.4}")).collect();
        println!("  [{}]  sum {:.4}", row.join(" "), xi.row_sum(i));
    }
    let sampled = sample_bernoulli_matrix(&g, 8, 7)?;
    println!("Bernoulli-sampled ξ, max row sum {:.4}", sampled.max_row_sum());

    // distance to a perturbation and the cut norm of the difference
    let delta = StepKernel::new(vec![vec![1.0, -1.0], vec![-1.0, 0.5]])?;
    for eps in [0.05, 0.1, 0.2] {
        let g2 = g.perturbed(&delta, eps)?;
        let diff = g.kernel().difference(g2.kernel())?;
        println!(
            "ε = {eps:<4}  d(G₁,G₂) = {:.4}  cut norm = {:.4}  (search lower bound {:.4})",
            dist_sup_l1(g.kernel(), g2.kernel())?,
            cut_norm_exact(&diff)?,
            cut_norm_lower_bound(&diff, 16, 1)?
        );
    }

    // the operator and its exponential; e^{t𝒜}1 stays below e^{Ct}
    let ones = GridFunction::constant(2, 1.0)?;
    let c = g.max_row_mean();
    println!("𝒜1 = {:?}, C = {c}", kernel_apply(g.kernel(), &ones)?.samples());
    for t in [0.1, 1.0, 5.0] {
        let e = kernel_exponential_apply(g.kernel(), &ones, t)?;
        println!("t = {t:<3}  e^(t𝒜)1 = {:?}  e^(Ct) = {:.4}", e.samples(), (c * t).exp());
    }
    Ok(())
}
