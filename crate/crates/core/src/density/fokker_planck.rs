//! Finite-volume solver for `∂ₜp = ∂ₓₓp − ∂ₓ(b p)` on the circle.
//!
//! The flux through the face between cells `i` and `i + 1` is
//! `F = (α p_i − β p_{i+1}) / h`. With exponential fitting
//! (Scharfetter-Gummel) `α = B(−z)`, `β = B(z)`, `z = h b̄` and
//! `B(z) = z / (eᶻ − 1)`, where `b̄` is the fourth-order average of the drift
//! over the face's cell-to-cell interval; discrete Gibbs densities are then
//! stationary up to that quadrature error. Plain upwinding is kept as an option.
//!
//! Both time steppings conserve mass by telescoping. The explicit step is
//! positive exactly when `dt ≤ h² / maxᵢ(αᵢ + βᵢ₋₁)`; the backward-Euler step
//! solves an M-matrix system and is positive for every `dt`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{DensityGrid, TorusGrid1D};
use crate::drift::{DriftKernel, TrigSeries};
use crate::error::{Error, Result};
use crate::graphon::{Graphon, InteractionMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flux {
    #[default]
    ExponentialFitting,
    Upwind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepping {
    #[default]
    Explicit,
    /// Backward Euler with the drift frozen at the start of the step.
    Implicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FpOptions {
    #[serde(default)]
    pub flux: Flux,
    #[serde(default)]
    pub stepping: Stepping,
}

/// `B(z) = z / (eᶻ − 1)`, with `B(0) = 1`.
#[inline]
pub fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-2 {
        let z2 = z * z;
        1.0 - 0.5 * z + z2 / 12.0 - z2 * z2 / 720.0
    } else {
        z / z.exp_m1()
    }
}

/// Face weights `(α, β)`; face `i` sits between cells `i` and `i + 1`.
fn face_weights(h: f64, drift: &[f64], flux: Flux) -> (Vec<f64>, Vec<f64>) {
    let n = drift.len();
    let at = |i: isize| drift[i.rem_euclid(n as isize) as usize];
    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    for i in 0..n {
        let k = i as isize;
        match flux {
            Flux::ExponentialFitting => {
                let avg = (-at(k - 1) + 13.0 * at(k) + 13.0 * at(k + 1) - at(k + 2)) / 24.0;
                let z = h * avg;
                beta[i] = bernoulli(z);
                alpha[i] = beta[i] + z;
            }
            Flux::Upwind => {
                let b = 0.5 * (at(k) + at(k + 1));
                alpha[i] = 1.0 + h * b.max(0.0);
                beta[i] = 1.0 + h * (-b).max(0.0);
            }
        }
    }
    (alpha, beta)
}

fn check_drift(grid: &TorusGrid1D, drift: &[f64]) -> Result<()> {
    if drift.len() != grid.n() {
        return Err(Error::DimensionMismatch { expected: grid.n(), got: drift.len() });
    }
    if drift.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidArgument("drift must be finite".into()));
    }
    Ok(())
}

/// Largest explicit step that keeps every cell nonnegative.
pub fn stability_bound(grid: &TorusGrid1D, drift: &[f64], flux: Flux) -> Result<f64> {
    check_drift(grid, drift)?;
    let h = grid.h();
    let (alpha, beta) = face_weights(h, drift, flux);
    let n = grid.n();
    let worst = (0..n).map(|i| alpha[i] + beta[(i + n - 1) % n]).fold(0.0f64, f64::max);
    Ok(h * h / worst)
}

/// One step with the default options (explicit, exponential fitting).
pub fn fp_step(p: &DensityGrid, drift: &[f64], dt: f64) -> Result<DensityGrid> {
    fp_step_with(p, drift, dt, FpOptions::default())
}

/// One step; `drift` holds `b` at the cell centres.
pub fn fp_step_with(p: &DensityGrid, drift: &[f64], dt: f64, options: FpOptions) -> Result<DensityGrid> {
    let grid = p.grid();
    check_drift(&grid, drift)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let n = grid.n();
    let h = grid.h();
    let (alpha, beta) = face_weights(h, drift, options.flux);
    let r = dt / (h * h);
    let old = p.values();
    let mut new = match options.stepping {
        Stepping::Explicit => {
            let worst = (0..n).map(|i| alpha[i] + beta[(i + n - 1) % n]).fold(0.0f64, f64::max);
            let bound = h * h / worst;
            if dt > bound * (1.0 + 1e-12) {
                return Err(Error::UnstableStep { dt, bound });
            }
            (0..n)
                .map(|i| {
                    let (prev, next) = ((i + n - 1) % n, (i + 1) % n);
                    let out_flux = alpha[i] * old[i] - beta[i] * old[next];
                    let in_flux = alpha[prev] * old[prev] - beta[prev] * old[i];
                    old[i] - r * (out_flux - in_flux)
                })
                .collect::<Vec<f64>>()
        }
        Stepping::Implicit => {
            let lower: Vec<f64> = (0..n).map(|i| -r * alpha[(i + n - 1) % n]).collect();
            let upper: Vec<f64> = (0..n).map(|i| -r * beta[i]).collect();
            let diag: Vec<f64> = (0..n).map(|i| 1.0 + r * (alpha[i] + beta[(i + n - 1) % n])).collect();
            solve_cyclic(&lower, &diag, &upper, old)
        }
    };
    // both steps are positive in exact arithmetic; rounding can leave ulp-sized negatives
    let scale = old.iter().fold(0.0f64, |a, &v| a.max(v));
    for (cell, v) in new.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v > -1e-14 * scale {
                *v = 0.0;
            } else {
                return Err(Error::NegativeMass { cell, value: *v });
            }
        }
    }
    DensityGrid::new(grid, new)
}

/// Tridiagonal solve without pivoting; `lower[0]` and `upper[n − 1]` are ignored.
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut denom = diag[0];
    x[0] = rhs[0] / denom;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / denom;
        denom = diag[i] - lower[i] * c[i - 1];
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

/// Periodic tridiagonal system: row `i` couples `i − 1`, `i`, `i + 1` mod `n`.
/// Sherman-Morrison on the corner entries.
fn solve_cyclic(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let corner_top = lower[0];
    let corner_bottom = upper[n - 1];
    let gamma = -diag[0];
    let mut modified = diag.to_vec();
    modified[0] -= gamma;
    modified[n - 1] -= corner_bottom * corner_top / gamma;
    let x = solve_tridiagonal(lower, &modified, upper, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = corner_bottom;
    let z = solve_tridiagonal(lower, &modified, upper, &u);
    let fact = (x[0] + corner_top * x[n - 1] / gamma) / (1.0 + z[0] + corner_top * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(a, b)| a - fact * b).collect()
}

/// `h Σ_y β(x − y) p(y)` at every cell centre by direct summation.
pub fn convolve_direct(kernel: &DriftKernel, p: &DensityGrid) -> Vec<f64> {
    let grid = p.grid();
    let h = grid.h();
    let centers = grid.centers();
    centers
        .iter()
        .map(|&x| h * centers.iter().zip(p.values()).map(|(&y, &v)| kernel.beta(x - y) * v).sum::<f64>())
        .collect()
}

/// Block-reduced graphon mean-field Fokker-Planck system.
///
/// Block `i` is driven by `b̄ᵢ(x) = (1/m) Σⱼ g_ij (β * Pʲ)(x)`; the convolution
/// is evaluated mode by mode from the kernel's trigonometric series, which is
/// exact for every supported torus kernel and costs `O(n K)` per block.
#[derive(Debug, Clone)]
pub struct CoupledBlockFp {
    blocks: usize,
    weights: Vec<f64>,
    series: TrigSeries,
    cos_table: Vec<Vec<f64>>,
    sin_table: Vec<Vec<f64>>,
    grid: TorusGrid1D,
    dt: f64,
    options: FpOptions,
}

impl CoupledBlockFp {
    pub fn new(g: &Graphon, kernel: &DriftKernel, grid: TorusGrid1D, dt: f64, options: FpOptions) -> Result<Self> {
        let m = g.blocks();
        let q = g.quadrature_matrix();
        let weights = InteractionMatrix::new(m, (0..m * m).map(|k| q[(k / m, k % m)]).collect())?;
        Self::with_weights(&weights, kernel, grid, dt, options)
    }

    /// Equations coupled by an arbitrary weight matrix: `b̄ᵢ = Σⱼ ξ_ij (β * Pʲ)`.
    /// This is also the law of the independent projection of an `N`-particle system.
    pub fn with_weights(
        xi: &InteractionMatrix,
        kernel: &DriftKernel,
        grid: TorusGrid1D,
        dt: f64,
        options: FpOptions,
    ) -> Result<Self> {
        let period = kernel
            .domain()
            .period()
            .ok_or_else(|| Error::DomainMismatch("the Fokker-Planck solver needs a torus kernel".into()))?;
        if (period - grid.period()).abs() > 1e-12 * period {
            return Err(Error::DomainMismatch(format!(
                "kernel period {period} differs from grid period {}",
                grid.period()
            )));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let series = kernel.trig_series().expect("torus kernels are trigonometric");
        let centers = grid.centers();
        let cos_table = series.terms.iter().map(|t| centers.iter().map(|x| (t.omega * x).cos()).collect()).collect();
        let sin_table = series.terms.iter().map(|t| centers.iter().map(|x| (t.omega * x).sin()).collect()).collect();
        let m = xi.n();
        Ok(Self {
            blocks: m,
            weights: (0..m * m).map(|k| xi.get(k / m, k % m)).collect(),
            series,
            cos_table,
            sin_table,
            grid,
            dt,
            options,
        })
    }

    /// An explicit step that is stable for any densities: the face drifts never
    /// exceed `(7/6) · sup|β| · max row sum`, and `αᵢ + βᵢ₋₁ ≤ 2 + h(|b̄ᵢ| + |b̄ᵢ₋₁|)`.
    pub fn safe_explicit_dt(xi: &InteractionMatrix, kernel: &DriftKernel, grid: TorusGrid1D) -> f64 {
        let h = grid.h();
        let sup = 7.0 / 6.0 * kernel.sup_b() * xi.max_row_sum();
        0.95 * h * h / (2.0 + 2.0 * h * sup)
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn grid(&self) -> TorusGrid1D {
        self.grid
    }

    fn check_init(&self, densities: &[DensityGrid]) -> Result<()> {
        if densities.len() != self.blocks {
            return Err(Error::DimensionMismatch { expected: self.blocks, got: densities.len() });
        }
        if let Some(bad) = densities.iter().find(|p| p.grid() != self.grid) {
            return Err(Error::DimensionMismatch { expected: self.grid.n(), got: bad.grid().n() });
        }
        Ok(())
    }

    fn moments(&self, p: &DensityGrid) -> Vec<f64> {
        let h = self.grid.h();
        let v = p.values();
        let mut out = Vec::with_capacity(1 + 2 * self.series.terms.len());
        out.push(h * v.iter().sum::<f64>());
        for (c, s) in self.cos_table.iter().zip(&self.sin_table) {
            out.push(h * c.iter().zip(v).map(|(a, b)| a * b).sum::<f64>());
            out.push(h * s.iter().zip(v).map(|(a, b)| a * b).sum::<f64>());
        }
        out
    }

    /// Drift of every block at the cell centres.
    pub fn block_drifts(&self, densities: &[DensityGrid]) -> Result<Vec<Vec<f64>>> {
        self.check_init(densities)?;
        let m = self.blocks;
        let moments: Vec<Vec<f64>> = densities.iter().map(|p| self.moments(p)).collect();
        Ok((0..m)
            .map(|i| {
                let mut comb = vec![0.0; moments[0].len()];
                for (j, mj) in moments.iter().enumerate() {
                    let w = self.weights[i * m + j];
                    comb.iter_mut().zip(mj).for_each(|(a, b)| *a += w * b);
                }
                let mut drift = vec![self.series.constant * comb[0]; self.grid.n()];
                for (k, t) in self.series.terms.iter().enumerate() {
                    let (cy, sy) = (comb[1 + 2 * k], comb[2 + 2 * k]);
                    let (cc, ss) = (t.cos * cy - t.sin * sy, t.cos * sy + t.sin * cy);
                    for ((d, c), s) in drift.iter_mut().zip(&self.cos_table[k]).zip(&self.sin_table[k]) {
                        *d += c * cc + s * ss;
                    }
                }
                drift
            })
            .collect())
    }

    /// Advances every block by `dt` from a common snapshot of drifts.
    pub fn step(&self, densities: &[DensityGrid], dt: f64) -> Result<Vec<DensityGrid>> {
        let drifts = self.block_drifts(densities)?;
        densities
            .par_iter()
            .zip(drifts.par_iter())
            .map(|(p, b)| fp_step_with(p, b, dt, self.options))
            .collect()
    }

    pub fn solve(&self, init: &[DensityGrid], t_final: f64) -> Result<Vec<DensityGrid>> {
        self.solve_observed(init, t_final, |_, _| Ok(()))
    }

    /// Solves to `T`, calling `observe(t, densities)` at `t = 0` and after every step.
    pub fn solve_observed(
        &self,
        init: &[DensityGrid],
        t_final: f64,
        mut observe: impl FnMut(f64, &[DensityGrid]) -> Result<()>,
    ) -> Result<Vec<DensityGrid>> {
        self.check_init(init)?;
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidArgument(format!("T must be nonnegative, got {t_final}")));
        }
        let steps = ((t_final / self.dt) - 1e-9).ceil().max(0.0) as usize;
        let dt = if steps == 0 { 0.0 } else { t_final / steps as f64 };
        let mut state = init.to_vec();
        observe(0.0, &state)?;
        for s in 0..steps {
            state = self.step(&state, dt)?;
            observe((s + 1) as f64 * dt, &state)?;
        }
        Ok(state)
    }
}

/// Solves the coupled block system with explicit exponential-fitting steps.
pub fn solve_coupled_block_fp(
    g: &Graphon,
    kernel: &DriftKernel,
    init: &[DensityGrid],
    t_final: f64,
    dt: f64,
) -> Result<Vec<DensityGrid>> {
    let grid = init.first().ok_or(Error::EmptySubset)?.grid();
    CoupledBlockFp::new(g, kernel, grid, dt, FpOptions::default())?.solve(init, t_final)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, CounterRng};
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    fn grid(n: usize) -> TorusGrid1D {
        TorusGrid1D::new(n, 1.0).unwrap()
    }

    fn first_mode(p: &DensityGrid) -> f64 {
        let g = p.grid();
        2.0 * g.h() * p.values().iter().enumerate().map(|(i, v)| v * (TAU * g.center(i)).cos()).sum::<f64>()
    }

    #[test]
    fn bernoulli_function() {
        assert_eq!(bernoulli(0.0), 1.0);
        for z in [-3.0, -0.5, -0.011, -0.009, 0.002, 0.0099, 0.0101, 1.0, 20.0] {
            let exact = z / f64::exp_m1(z);
            assert_relative_eq!(bernoulli(z), exact, max_relative = 1e-13);
            assert_relative_eq!(bernoulli(-z), bernoulli(z) + z, max_relative = 1e-13);
        }
    }

    #[test]
    fn uniform_is_stationary_without_drift() {
        let p = DensityGrid::uniform(grid(128));
        let out = fp_step(&p, &vec![0.0; 128], 1e-5).unwrap();
        for (a, b) in out.values().iter().zip(p.values()) {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn heat_mode_decay() {
        let g = grid(1024);
        let mut p = DensityGrid::from_fn(g, |x| 1.0 + (TAU * x).cos()).unwrap();
        let a0 = first_mode(&p);
        let zero = vec![0.0; 1024];
        let dt = 0.4 * stability_bound(&g, &zero, Flux::ExponentialFitting).unwrap();
        let steps = (0.01 / dt).ceil() as usize;
        let dt = 0.01 / steps as f64;
        for _ in 0..steps {
            p = fp_step(&p, &zero, dt).unwrap();
            assert!((p.mass() - 1.0).abs() < 1e-10);
        }
        let ratio = first_mode(&p) / a0;
        let exact = (-4.0 * PI * PI * 0.01f64).exp();
        assert!((ratio / exact - 1.0).abs() < 1e-3, "{ratio} vs {exact}");
    }

    #[test]
    fn gibbs_density_is_stationary() {
        let g = grid(1024);
        let amp = 0.5;
        // U = A cos(2πx), b = −U′
        let drift: Vec<f64> = g.centers().iter().map(|x| amp * TAU * (TAU * x).sin()).collect();
        let p0 = DensityGrid::from_fn(g, |x| (-amp * (TAU * x).cos()).exp()).unwrap();
        let dt = 0.9 * stability_bound(&g, &drift, Flux::ExponentialFitting).unwrap();
        let t = 2000.0 * dt;
        let mut p = p0.clone();
        for _ in 0..2000 {
            p = fp_step(&p, &drift, dt).unwrap();
        }
        let change = p.values().iter().zip(p0.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(change / t < 1e-6, "drift per unit time {}", change / t);
    }

    #[test]
    fn unstable_step_rejected() {
        let g = grid(64);
        let p = DensityGrid::uniform(g);
        let drift = vec![0.0; 64];
        let bound = stability_bound(&g, &drift, Flux::ExponentialFitting).unwrap();
        assert_relative_eq!(bound, g.h() * g.h() / 2.0, max_relative = 1e-14);
        assert!(matches!(fp_step(&p, &drift, 1.01 * bound), Err(Error::UnstableStep { .. })));
        let implicit = FpOptions { stepping: Stepping::Implicit, ..Default::default() };
        assert!(fp_step_with(&p, &drift, 100.0 * bound, implicit).is_ok());
    }

    #[test]
    fn randomized_positivity_and_mass() {
        let rng = CounterRng::new(31);
        let g = grid(64);
        for case in 0..1000u32 {
            let values: Vec<f64> = (0..64).map(|c| {
                let u = rng.uniform(stream::SAMPLING, case, c, 0);
                if u < 0.2 { 0.0 } else { u }
            }).collect();
            let p = DensityGrid::normalized(g, values).unwrap();
            let amp = 50.0 * rng.uniform(stream::SAMPLING, case, 100, 0);
            let drift: Vec<f64> = (0..64).map(|c| amp * (2.0 * rng.uniform(stream::SAMPLING, case, c, 1) - 1.0)).collect();
            let flux = if case % 2 == 0 { Flux::ExponentialFitting } else { Flux::Upwind };
            let stepping = if case % 3 == 0 { Stepping::Implicit } else { Stepping::Explicit };
            let bound = stability_bound(&g, &drift, flux).unwrap();
            let dt = if stepping == Stepping::Implicit { 50.0 * bound } else { bound };
            let out = fp_step_with(&p, &drift, dt, FpOptions { flux, stepping }).unwrap();
            assert!(out.values().iter().all(|&v| v >= 0.0));
            assert!((out.mass() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn implicit_matches_explicit_for_small_steps() {
        let g = grid(256);
        let drift: Vec<f64> = g.centers().iter().map(|x| (TAU * x).sin()).collect();
        let p0 = DensityGrid::von_mises(g, 0.2, 3.0).unwrap();
        let dt = 0.5 * stability_bound(&g, &drift, Flux::ExponentialFitting).unwrap();
        let implicit = FpOptions { stepping: Stepping::Implicit, ..Default::default() };
        let (mut a, mut b) = (p0.clone(), p0);
        for _ in 0..2000 {
            a = fp_step(&a, &drift, dt).unwrap();
            b = fp_step_with(&b, &drift, dt, implicit).unwrap();
        }
        let diff = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-3, "{diff}");
    }

    #[test]
    fn cyclic_solver_matches_dense() {
        let n = 7;
        let lower: Vec<f64> = (0..n).map(|i| -0.3 - 0.05 * i as f64).collect();
        let upper: Vec<f64> = (0..n).map(|i| -0.2 - 0.01 * i as f64).collect();
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + 0.1 * i as f64).collect();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = solve_cyclic(&lower, &diag, &upper, &rhs);
        let mut a = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = diag[i];
            a[(i, (i + 1) % n)] = upper[i];
            a[(i, (i + n - 1) % n)] = lower[i];
        }
        let exact = a.lu().solve(&nalgebra::DVector::from_vec(rhs)).unwrap();
        for (p, q) in x.iter().zip(exact.iter()) {
            assert_relative_eq!(p, q, epsilon = 1e-13);
        }
    }

    #[test]
    fn modal_drift_matches_direct_convolution() {
        let g = grid(128);
        let tabulated = DriftKernel::tabulated((0..16).map(|k| ((k * 5 % 16) as f64 - 7.0) / 10.0).collect(), 1.0).unwrap();
        for kernel in [DriftKernel::sine_torus(0.3, 2, 1.0).unwrap(), tabulated] {
            let graphon = Graphon::new(vec![vec![0.9, 0.2], vec![0.2, 0.5]]).unwrap();
            let solver = CoupledBlockFp::new(&graphon, &kernel, g, 1e-5, FpOptions::default()).unwrap();
            let ps = vec![DensityGrid::von_mises(g, 0.1, 2.0).unwrap(), DensityGrid::wrapped_gaussian(g, 0.7, 0.02).unwrap()];
            let drifts = solver.block_drifts(&ps).unwrap();
            let conv: Vec<Vec<f64>> = ps.iter().map(|p| convolve_direct(&kernel, p)).collect();
            for i in 0..2 {
                for c in 0..128 {
                    let direct = (graphon.get(i, 0) * conv[0][c] + graphon.get(i, 1) * conv[1][c]) / 2.0;
                    assert_relative_eq!(drifts[i][c], direct, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn block_solver_examples() {
        let g = grid(64);
        let sine = DriftKernel::sine_torus(0.3, 1, 1.0).unwrap();
        let one = Graphon::constant(1.0).unwrap();
        let uniform = vec![DensityGrid::uniform(g)];
        let out = solve_coupled_block_fp(&one, &sine, &uniform, 0.1, 1e-4).unwrap();
        for v in out[0].values() {
            assert!((v - 1.0).abs() < 1e-8);
        }
        // g ≡ 0 decouples into heat equations
        let zero = Graphon::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let init = vec![DensityGrid::von_mises(g, 0.3, 2.0).unwrap(), DensityGrid::von_mises(g, 0.6, 1.0).unwrap()];
        let coupled = solve_coupled_block_fp(&zero, &sine, &init, 0.05, 1e-4).unwrap();
        let heat = solve_coupled_block_fp(&zero, &DriftKernel::zero(crate::drift::Domain::Torus { period: 1.0 }).unwrap(), &init, 0.05, 1e-4).unwrap();
        assert_eq!(coupled, heat);
        assert!(CoupledBlockFp::new(&one, &DriftKernel::linear(1.0, 1).unwrap(), g, 1e-4, FpOptions::default()).is_err());
    }
}
