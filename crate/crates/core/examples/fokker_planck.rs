//! Coupled block Fokker-Planck equations of a step-graphon mean-field system
//! on the circle, with the entropy and Fisher information between blocks
//! and the log-density Hessian monitor.
//!
//! cargo run --release --example fokker_planck [output-dir]

use std::f64::consts::TAU;

use graphon_lab::density::{
    entropy_grid, fisher_grid, hessian_log_sup, CoupledBlockFp, DensityGrid, FpOptions, TorusGrid1D,
};
use graphon_lab::drift::DriftKernel;
use graphon_lab::graphon::{Graphon, InteractionMatrix};

fn main() -> graphon_lab::Result<()> {
    let out_dir = std::env::args().nth(1);
    let g = Graphon::new(vec![vec![0.9, 0.3, 0.1], vec![0.3, 0.8, 0.3], vec![0.1, 0.3, 0.9]])?;
    let kernel = DriftKernel::sine_torus(1.0, 1, TAU)?;
    let grid = TorusGrid1D::new(512, TAU)?;
    let init: Vec<DensityGrid> =
        [0.5, 2.5, 4.5].iter().map(|&m| DensityGrid::von_mises(grid, m, 3.0)).collect::<Result<_, _>>()?;
    let weights = InteractionMatrix::new(3, (0..9).map(|k| g.get(k / 3, k % 3) / 3.0).collect())?;
    let dt = CoupledBlockFp::safe_explicit_dt(&weights, &kernel, grid);
    let solver = CoupledBlockFp::new(&g, &kernel, grid, dt, FpOptions::default())?;

    let mut snapshots = vec![Vec::new(); 3];
    let mut next = 0.0;
    let fin = solver.solve_observed(&init, 1.0, |t, p| {
        if t >= next {
            println!(
                "t = {t:.3}  masses {:.12} {:.12} {:.12}  H(P¹|P²) = {:.4e}",
                p[0].mass(),
                p[1].mass(),
                p[2].mass(),
                entropy_grid(&p[0], &p[1])?
            );
            snapshots.iter_mut().zip(p).for_each(|(s, d)| s.push(d.clone()));
            next += 0.25;
        }
        Ok(())
    })?;
    for (u, s) in snapshots.iter().enumerate() {
        println!("block {u}: sup |∂²ₓ log p| over the run = {:.4}", hessian_log_sup(s)?);
    }
    println!("I(P¹|P³) at T = 1: {:.4e}", fisher_grid(&fin[0], &fin[2])?);
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(&dir)?;
        for (u, p) in fin.iter().enumerate() {
            p.write_csv(format!("{dir}/block_{u}.csv"))?;
        }
        println!("wrote block densities to {dir}");
    }
    Ok(())
}
