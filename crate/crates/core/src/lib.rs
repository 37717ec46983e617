//! Numerical laboratory for non-exchangeable interacting diffusions.
//!
//! Particles interact through a weight matrix `ξ` (or a graphon limit) and a
//! pairwise kernel `b`. The crate compares the interacting system with its
//! independent projection and with the graphon mean-field system, using
//! closed-form Gaussian laws, particle simulation, Fokker-Planck solvers and
//! a subset hierarchy of entropy bounds.

pub mod density;
pub mod drift;
pub mod error;
pub mod gaussian;
pub mod graphon;
pub mod harness;
pub mod hierarchy;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
