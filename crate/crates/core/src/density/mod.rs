//! One-dimensional torus densities: the Fokker-Planck solver, grid
//! functionals, and kernel density estimation.

pub mod fokker_planck;
pub mod functionals;
pub mod grid;
pub mod kde;

pub use fokker_planck::{
    bernoulli, convolve_direct, fp_step, fp_step_with, solve_coupled_block_fp, stability_bound, CoupledBlockFp,
    Flux, FpOptions, Stepping,
};
pub use functionals::{entropy_grid, fisher_grid, hessian_log_sup, tv_grid, DENSITY_FLOOR};
pub use grid::{DensityGrid, TorusGrid1D};
pub use kde::{kde_density, silverman_bandwidth};
