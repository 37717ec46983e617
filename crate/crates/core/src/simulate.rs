//! Euler-Maruyama ensembles for the particle system, its independent
//! projection, and the block-reduced graphon mean-field system.
//!
//! Replicas are stepped in parallel. Every Brownian increment is read from the
//! counter-based generator at `(seed, replica, particle, step)`, so results do
//! not depend on the thread count and the particle system and the projection
//! see identical noise when run with the same seed.
//!
//! The projection is simulated in its autonomous form: particle `i` feels
//! `Σ_j ξ_ij ⟨b(Y_i, ·), Q_j⟩` evaluated at its own position `Y_i`. The laws
//! `Q_j` are replaced by cross-replica empirical measures, computed once per
//! step through the kernel's moment representation.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::density::DensityGrid;
use crate::drift::{Domain, DriftKernel};
use crate::error::{Error, Result};
use crate::gaussian::GaussianLaw;
use crate::graphon::{Graphon, InteractionMatrix};
use crate::rng::{stream, CounterRng};

/// Positions beyond this magnitude abort a Euclidean run.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Smallest replica count accepted by the mean-field closures.
pub const MIN_MEAN_FIELD_REPLICAS: usize = 100;

const MAX_STEPS: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_final: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(dt: f64, t_final: f64, seed: u64) -> Result<Self> {
        let cfg = Self { dt, t_final, seed };
        cfg.steps()?;
        Ok(cfg)
    }

    /// Number of steps and the step actually used, `T / steps`.
    pub fn steps(&self) -> Result<(usize, f64)> {
        if !(self.dt > 0.0 && self.t_final > 0.0 && self.dt.is_finite() && self.t_final.is_finite()) {
            return Err(Error::InvalidArgument("dt and T must be positive".into()));
        }
        if self.dt > self.t_final * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!("dt = {} exceeds T = {}", self.dt, self.t_final)));
        }
        let ratio = self.t_final / self.dt;
        if ratio > MAX_STEPS {
            return Err(Error::InvalidArgument(format!("T/dt = {ratio:e} exceeds {MAX_STEPS:e}")));
        }
        let steps = (ratio - 1e-9).ceil().max(1.0) as usize;
        Ok((steps, self.t_final / steps as f64))
    }
}

/// Initial law of one particle.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialLaw {
    Point(Vec<f64>),
    Gaussian(GaussianLaw),
    /// Piecewise-constant density on a one-dimensional torus grid.
    Density(DensityGrid),
}

impl InitialLaw {
    fn dim(&self) -> usize {
        match self {
            InitialLaw::Point(p) => p.len(),
            InitialLaw::Gaussian(g) => g.dim(),
            InitialLaw::Density(_) => 1,
        }
    }
}

/// `M` replicas of `N` particles in dimension `d`, stored replica-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleState {
    replicas: usize,
    particles: usize,
    dim: usize,
    positions: Vec<f64>,
    time: f64,
    domain: Domain,
}

impl EnsembleState {
    pub fn new(replicas: usize, particles: usize, domain: Domain, positions: Vec<f64>, time: f64) -> Result<Self> {
        let dim = domain.dim();
        if replicas == 0 || particles == 0 {
            return Err(Error::InvalidArgument("need M ≥ 1 and N ≥ 1".into()));
        }
        let expected = replicas * particles * dim;
        if positions.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: positions.len() });
        }
        if !(time >= 0.0) {
            return Err(Error::InvalidArgument("time must be nonnegative".into()));
        }
        let mut state = Self { replicas, particles, dim, positions, time, domain };
        if state.positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("positions must be finite".into()));
        }
        state.positions.iter_mut().for_each(|x| *x = domain.wrap(*x));
        Ok(state)
    }

    /// Every replica and particle at the same point.
    pub fn constant(replicas: usize, particles: usize, domain: Domain, point: &[f64]) -> Result<Self> {
        if point.len() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), got: point.len() });
        }
        let positions = (0..replicas * particles).flat_map(|_| point.iter().copied()).collect();
        Self::new(replicas, particles, domain, positions, 0.0)
    }

    /// Independent draws, particle `i` from `laws[i]`, on the `INITIAL` stream.
    pub fn sample(replicas: usize, laws: &[InitialLaw], domain: Domain, seed: u64) -> Result<Self> {
        let d = domain.dim();
        if let Some(bad) = laws.iter().find(|l| l.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: bad.dim() });
        }
        if laws.iter().any(|l| matches!(l, InitialLaw::Density(_))) && domain.period().is_none() {
            return Err(Error::DomainMismatch("grid densities live on the torus".into()));
        }
        let rng = CounterRng::new(seed);
        let n = laws.len();
        let factors: Vec<Option<DMatrix<f64>>> = laws
            .iter()
            .map(|l| match l {
                InitialLaw::Gaussian(g) => g.cov().clone().cholesky().map(|c| c.l()),
                _ => None,
            })
            .collect();
        let mut positions = vec![0.0; replicas * n * d];
        positions.par_chunks_mut(n * d).enumerate().for_each(|(r, block)| {
            let mut z = vec![0.0; d];
            for (i, law) in laws.iter().enumerate() {
                let out = &mut block[i * d..(i + 1) * d];
                match law {
                    InitialLaw::Point(p) => out.copy_from_slice(p),
                    InitialLaw::Gaussian(g) => {
                        for (c, zc) in z.iter_mut().enumerate() {
                            *zc = rng.normal(stream::INITIAL, r as u32, i as u32, 0, c);
                        }
                        let l = factors[i].as_ref().expect("validated SPD");
                        for (row, o) in out.iter_mut().enumerate() {
                            *o = g.mean()[row] + (0..=row).map(|c| l[(row, c)] * z[c]).sum::<f64>();
                        }
                    }
                    InitialLaw::Density(p) => {
                        out[0] = p.sample(rng.uniform(stream::INITIAL, r as u32, i as u32, 0));
                    }
                }
            }
        });
        Self::new(replicas, n, domain, positions, 0.0)
    }

    pub fn replicas(&self) -> usize {
        self.replicas
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn position(&self, replica: usize, particle: usize) -> &[f64] {
        let at = (replica * self.particles + particle) * self.dim;
        &self.positions[at..at + self.dim]
    }

    /// Coordinate `c` of particle `i` across all replicas.
    pub fn samples(&self, particle: usize, coord: usize) -> Vec<f64> {
        (0..self.replicas).map(|r| self.position(r, particle)[coord]).collect()
    }

    /// Writes the binary snapshot: `M`, `N`, `d` as u64 and `t` as f64, then
    /// the positions, all little-endian.
    pub fn write_snapshot(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        for v in [self.replicas as u64, self.particles as u64, self.dim as u64] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.time.to_le_bytes())?;
        for x in &self.positions {
            w.write_all(&x.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_snapshot(path: impl AsRef<Path>, domain: Domain) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut word = [0u8; 8];
        let mut header = [0u64; 3];
        for h in header.iter_mut() {
            r.read_exact(&mut word)?;
            *h = u64::from_le_bytes(word);
        }
        r.read_exact(&mut word)?;
        let time = f64::from_le_bytes(word);
        let [m, n, d] = header.map(|v| v as usize);
        if d != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), got: d });
        }
        let mut positions = Vec::with_capacity(m * n * d);
        for _ in 0..m * n * d {
            r.read_exact(&mut word)?;
            positions.push(f64::from_le_bytes(word));
        }
        Self::new(m, n, domain, positions, time)
    }
}

fn check_kernel(kernel: &DriftKernel, init: &EnsembleState) -> Result<()> {
    if kernel.domain() != init.domain {
        return Err(Error::DomainMismatch(format!(
            "kernel lives on {:?}, ensemble on {:?}",
            kernel.domain(),
            init.domain
        )));
    }
    Ok(())
}

fn check_xi(xi: &InteractionMatrix, init: &EnsembleState) -> Result<()> {
    if xi.n() != init.particles {
        return Err(Error::DimensionMismatch { expected: init.particles, got: xi.n() });
    }
    Ok(())
}

/// Adds `drift·h + √h ζ` to one replica, wrapping or checking for divergence.
#[inline]
#[allow(clippy::too_many_arguments)]
fn advance_replica(
    block: &mut [f64],
    drift: &[f64],
    h: f64,
    rng: &CounterRng,
    replica: usize,
    step: usize,
    dim: usize,
    domain: Domain,
) -> Result<()> {
    let sqrt_h = h.sqrt();
    let torus = domain.period().is_some();
    for (idx, (x, b)) in block.iter_mut().zip(drift).enumerate() {
        let (i, c) = (idx / dim, idx % dim);
        let z = rng.normal(stream::DYNAMICS, replica as u32, i as u32, step as u32, c);
        *x += b * h + sqrt_h * z;
        if torus {
            *x = domain.wrap(*x);
        } else if !(x.abs() <= DIVERGENCE_LIMIT) {
            return Err(Error::Divergence { step: step + 1, value: x.abs() });
        }
    }
    Ok(())
}

fn first_error(results: Vec<Result<()>>) -> Result<()> {
    results.into_iter().collect()
}

/// The interacting system `dX_i = Σ_j ξ_ij b(X_i, X_j) dt + dB_i`, replica by replica.
pub fn simulate_particle_system(
    xi: &InteractionMatrix,
    kernel: &DriftKernel,
    init: &EnsembleState,
    cfg: &SimConfig,
) -> Result<EnsembleState> {
    check_kernel(kernel, init)?;
    check_xi(xi, init)?;
    let (steps, h) = cfg.steps()?;
    let rng = CounterRng::new(cfg.seed);
    let (n, d, domain) = (init.particles, init.dim, init.domain);
    let mut out = init.clone();
    let results: Vec<Result<()>> = out
        .positions
        .par_chunks_mut(n * d)
        .enumerate()
        .map(|(r, block)| {
            let mut drift = vec![0.0; n * d];
            let mut pair = vec![0.0; d];
            for step in 0..steps {
                drift.iter_mut().for_each(|v| *v = 0.0);
                for i in 0..n {
                    let xi_row = xi.row(i);
                    let x = &block[i * d..(i + 1) * d];
                    for (j, &w) in xi_row.iter().enumerate() {
                        if w == 0.0 || j == i {
                            continue;
                        }
                        kernel.eval_into(x, &block[j * d..(j + 1) * d], &mut pair);
                        for (o, p) in drift[i * d..(i + 1) * d].iter_mut().zip(&pair) {
                            *o += w * p;
                        }
                    }
                }
                advance_replica(block, &drift, h, &rng, r, step, d, domain)?;
            }
            Ok(())
        })
        .collect();
    first_error(results)?;
    out.time = init.time + cfg.t_final;
    Ok(out)
}

/// Cross-replica moments of every particle, averaged over replicas.
fn particle_moments(kernel: &DriftKernel, state: &EnsembleState) -> Vec<Vec<f64>> {
    let mc = kernel.moment_count();
    let weight = 1.0 / state.replicas as f64;
    (0..state.particles)
        .into_par_iter()
        .map(|j| {
            let mut acc = vec![0.0; mc];
            for r in 0..state.replicas {
                kernel.accumulate_moments(state.position(r, j), weight, &mut acc);
            }
            acc
        })
        .collect()
}

fn mean_field_run(
    xi: &InteractionMatrix,
    kernel: &DriftKernel,
    init: &EnsembleState,
    cfg: &SimConfig,
) -> Result<EnsembleState> {
    check_kernel(kernel, init)?;
    check_xi(xi, init)?;
    if init.replicas < MIN_MEAN_FIELD_REPLICAS {
        return Err(Error::TooFewSamples { got: init.replicas, min: MIN_MEAN_FIELD_REPLICAS });
    }
    let (steps, h) = cfg.steps()?;
    let rng = CounterRng::new(cfg.seed);
    let (n, d, domain) = (init.particles, init.dim, init.domain);
    let mc = kernel.moment_count();
    let mut state = init.clone();
    for step in 0..steps {
        let moments = particle_moments(kernel, &state);
        let combined: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut acc = vec![0.0; mc];
                for (j, &w) in xi.row(i).iter().enumerate() {
                    if w != 0.0 {
                        for (a, m) in acc.iter_mut().zip(&moments[j]) {
                            *a += w * m;
                        }
                    }
                }
                acc
            })
            .collect();
        let results: Vec<Result<()>> = state
            .positions
            .par_chunks_mut(n * d)
            .enumerate()
            .map(|(r, block)| {
                let mut drift = vec![0.0; n * d];
                for i in 0..n {
                    kernel.field_from_moments(&combined[i], &block[i * d..(i + 1) * d], &mut drift[i * d..(i + 1) * d]);
                }
                advance_replica(block, &drift, h, &rng, r, step, d, domain)
            })
            .collect();
        first_error(results)?;
    }
    state.time = init.time + cfg.t_final;
    Ok(state)
}

/// The independent projection with laws replaced by cross-replica averages.
///
/// Requires at least `MIN_MEAN_FIELD_REPLICAS` replicas.
pub fn simulate_independent_projection(
    xi: &InteractionMatrix,
    kernel: &DriftKernel,
    init: &EnsembleState,
    cfg: &SimConfig,
) -> Result<EnsembleState> {
    mean_field_run(xi, kernel, init, cfg)
}

/// McKean-Vlasov particle approximation of the `m` coupled block equations of
/// a step graphon. Particle index `i` of the result is block `i`, carrying
/// `replicas` samples of that block's law.
pub fn simulate_graphon_mfv(
    g: &Graphon,
    kernel: &DriftKernel,
    init_per_block: &[InitialLaw],
    cfg: &SimConfig,
    replicas: usize,
) -> Result<EnsembleState> {
    let m = g.blocks();
    if init_per_block.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: init_per_block.len() });
    }
    let weights = g.quadrature_matrix();
    let xi = InteractionMatrix::new(m, weights.transpose().as_slice().to_vec())?;
    let init = EnsembleState::sample(replicas, init_per_block, kernel.domain(), cfg.seed)?;
    mean_field_run(&xi, kernel, &init, cfg)
}

/// Cross-replica sample moments (unbiased, divisor `M − 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMoments {
    pub means: Vec<DVector<f64>>,
    pub covariances: Vec<DMatrix<f64>>,
    pub joint_mean: DVector<f64>,
    pub joint_covariance: DMatrix<f64>,
}

pub fn empirical_moments(e: &EnsembleState) -> Result<EmpiricalMoments> {
    if e.replicas < 2 {
        return Err(Error::TooFewSamples { got: e.replicas, min: 2 });
    }
    let width = e.particles * e.dim;
    let m = e.replicas as f64;
    let mut mean = DVector::zeros(width);
    for block in e.positions.chunks(width) {
        for (a, x) in mean.iter_mut().zip(block) {
            *a += x;
        }
    }
    mean /= m;
    let mut cov = DMatrix::zeros(width, width);
    let mut centered = DVector::zeros(width);
    for block in e.positions.chunks(width) {
        for ((c, x), mu) in centered.iter_mut().zip(block).zip(mean.iter()) {
            *c = x - mu;
        }
        cov.ger(1.0, &centered, &centered, 1.0);
    }
    cov /= m - 1.0;
    let d = e.dim;
    let means = (0..e.particles).map(|i| mean.rows(i * d, d).into_owned()).collect();
    let covariances = (0..e.particles).map(|i| cov.view((i * d, i * d), (d, d)).into_owned()).collect();
    Ok(EmpiricalMoments { means, covariances, joint_mean: mean, joint_covariance: cov })
}
