//! Step graphons, interaction matrices, graphon distances and the integral
//! operator `f ↦ ∫ G(·, v) f(v) dv` on `[0, 1]`.
//!
//! Everything here works on piecewise-constant kernels over a uniform `m × m`
//! grid. Two kernels (or a kernel and a grid function) with different block
//! counts are compared on their least common refinement, which is exact for
//! step functions; the refinement size is capped to keep the dense matrices
//! at desk scale.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, CounterRng};

pub const DEFAULT_RESOLUTION_CAP: usize = 4096;

/// Largest block count handled by [`cut_norm_exact`].
pub const MAX_EXHAUSTIVE_BLOCKS: usize = 22;

const ROW_SUM_TOLERANCE: f64 = 1e-12;
const SYMMETRY_TOLERANCE: f64 = 1e-12;

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Least common multiple of two block counts, or an error past `cap`.
pub fn common_resolution(a: usize, b: usize, cap: usize) -> Result<usize> {
    let lcm = (a / gcd(a, b))
        .checked_mul(b)
        .ok_or(Error::ResolutionCap { required: usize::MAX, cap })?;
    if lcm > cap {
        return Err(Error::ResolutionCap { required: lcm, cap });
    }
    Ok(lcm)
}

/// A signed, piecewise-constant kernel on the uniform grid of `[0,1]²`.
///
/// Differences of graphons live here; [`Graphon`] is the validated
/// `[0,1]`-valued symmetric case.
#[derive(Debug, Clone, PartialEq)]
pub struct StepKernel {
    blocks: usize,
    values: Vec<f64>,
}

impl StepKernel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let blocks = rows.len();
        if blocks == 0 {
            return Err(Error::InvalidGraphon("no blocks".into()));
        }
        let mut values = Vec::with_capacity(blocks * blocks);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != blocks {
                return Err(Error::InvalidGraphon(format!(
                    "row {i} has {} entries, expected {blocks}",
                    row.len()
                )));
            }
            values.extend(row);
        }
        Self::from_flat(blocks, values)
    }

    pub fn from_flat(blocks: usize, values: Vec<f64>) -> Result<Self> {
        if blocks == 0 || values.len() != blocks * blocks {
            return Err(Error::InvalidGraphon(format!(
                "{} values for {blocks} blocks",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGraphon(format!("non-finite entry at {pos}")));
        }
        Ok(Self { blocks, values })
    }

    pub fn from_fn(blocks: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let values = (0..blocks * blocks).map(|idx| f(idx / blocks, idx % blocks)).collect();
        Self::from_flat(blocks, values)
    }

    pub fn constant(blocks: usize, value: f64) -> Result<Self> {
        Self::from_flat(blocks, vec![value; blocks * blocks])
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.blocks + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.blocks..(i + 1) * self.blocks]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.blocks).map(<[f64]>::to_vec).collect()
    }

    /// Point evaluation; the last block is closed at 1.
    pub fn value_at(&self, u: f64, v: f64) -> f64 {
        let idx = |x: f64| ((x * self.blocks as f64).floor().max(0.0) as usize).min(self.blocks - 1);
        self.get(idx(u), idx(v))
    }

    /// Same function on a finer grid; `blocks` must be a multiple of the current count.
    pub fn refine(&self, blocks: usize) -> Result<Self> {
        if blocks % self.blocks != 0 {
            return Err(Error::InvalidArgument(format!(
                "cannot refine {} blocks to {blocks}",
                self.blocks
            )));
        }
        let factor = blocks / self.blocks;
        Self::from_fn(blocks, |i, j| self.get(i / factor, j / factor))
    }

    /// `self - other` on the common refinement.
    pub fn difference(&self, other: &StepKernel) -> Result<StepKernel> {
        let m = common_resolution(self.blocks, other.blocks, DEFAULT_RESOLUTION_CAP)?;
        let (a, b) = (self.refine(m)?, other.refine(m)?);
        Self::from_flat(m, a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect())
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.blocks).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    /// `max_u ∫ k(u, v) dv`.
    pub fn max_row_mean(&self) -> f64 {
        (0..self.blocks)
            .map(|i| self.row(i).iter().sum::<f64>() / self.blocks as f64)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The `m × m` matrix of the integral operator acting on block values.
    pub fn quadrature_matrix(&self) -> DMatrix<f64> {
        let m = self.blocks;
        DMatrix::from_row_slice(m, m, &self.values) / m as f64
    }
}

/// On-disk graphon layout: `{"m": int, "values": [[...]]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GraphonFile {
    pub m: usize,
    pub values: Vec<Vec<f64>>,
}

/// A symmetric step graphon with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graphon(StepKernel);

impl Graphon {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_kernel(StepKernel::new(rows)?)
    }

    pub fn from_kernel(kernel: StepKernel) -> Result<Self> {
        if let Some(pos) = kernel.values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            let m = kernel.blocks;
            return Err(Error::InvalidGraphon(format!(
                "entry ({}, {}) = {} outside [0, 1]",
                pos / m,
                pos % m,
                kernel.values[pos]
            )));
        }
        if !kernel.is_symmetric(SYMMETRY_TOLERANCE) {
            return Err(Error::InvalidGraphon("not symmetric".into()));
        }
        Ok(Self(kernel))
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::from_kernel(StepKernel::constant(1, value)?)
    }

    /// Samples an analytic graphon at block midpoints.
    pub fn sample(blocks: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let h = 1.0 / blocks as f64;
        Self::from_kernel(StepKernel::from_fn(blocks, |i, j| {
            f((i as f64 + 0.5) * h, (j as f64 + 0.5) * h)
        })?)
    }

    /// A symmetric graphon with i.i.d. uniform block values.
    pub fn random(blocks: usize, seed: u64) -> Result<Self> {
        let rng = CounterRng::new(seed);
        Self::from_kernel(StepKernel::from_fn(blocks, |i, j| {
            let (a, b) = (i.min(j) as u32, i.max(j) as u32);
            rng.uniform(stream::SAMPLING, 0, a, b)
        })?)
    }

    /// `clamp(self + eps * delta, 0, 1)` on the common refinement.
    pub fn perturbed(&self, delta: &StepKernel, eps: f64) -> Result<Self> {
        let m = common_resolution(self.blocks(), delta.blocks(), DEFAULT_RESOLUTION_CAP)?;
        let (g, d) = (self.0.refine(m)?, delta.refine(m)?);
        Self::from_kernel(StepKernel::from_flat(
            m,
            g.values
                .iter()
                .zip(&d.values)
                .map(|(x, y)| (x + eps * y).clamp(0.0, 1.0))
                .collect(),
        )?)
    }

    pub fn kernel(&self) -> &StepKernel {
        &self.0
    }

    pub fn from_file_format(file: GraphonFile) -> Result<Self> {
        if file.values.len() != file.m {
            return Err(Error::InvalidGraphon(format!(
                "m = {} but {} rows given",
                file.m,
                file.values.len()
            )));
        }
        Self::new(file.values)
    }

    pub fn to_file_format(&self) -> GraphonFile {
        GraphonFile {
            m: self.blocks(),
            values: self.rows(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_file_format(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_file_format()).expect("graphon serializes")
    }
}

impl std::ops::Deref for Graphon {
    type Target = StepKernel;

    fn deref(&self) -> &StepKernel {
        &self.0
    }
}

/// Nonnegative `N × N` weights with row sums at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    n: usize,
    xi: Vec<f64>,
}

impl InteractionMatrix {
    pub fn new(n: usize, xi: Vec<f64>) -> Result<Self> {
        if n == 0 || xi.len() != n * n {
            return Err(Error::InvalidInteraction(format!("{} entries for N = {n}", xi.len())));
        }
        if let Some(pos) = xi.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInteraction(format!(
                "entry ({}, {}) = {} is not a nonnegative number",
                pos / n,
                pos % n,
                xi[pos]
            )));
        }
        let out = Self { n, xi };
        let worst = out.max_row_sum();
        if worst > 1.0 + ROW_SUM_TOLERANCE {
            return Err(Error::InvalidInteraction(format!("row sum {worst} exceeds 1")));
        }
        Ok(out)
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInteraction("ragged rows".into()));
        }
        Self::new(n, rows.concat())
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![0.0; n * n])
    }

    /// The exchangeable mean-field case `ξ_ij = 1/N`.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(n, vec![1.0 / n as f64; n * n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.xi[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.xi[i * self.n..(i + 1) * self.n]
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    pub fn max_row_sum(&self) -> f64 {
        (0..self.n).map(|i| self.row_sum(i)).fold(0.0, f64::max)
    }

    pub fn max_entry(&self) -> f64 {
        self.xi.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.xi.iter().all(|&v| v == 0.0)
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.xi)
    }

    /// The step kernel with block values `N ξ_ij`, i.e. the graphon `G_N`.
    pub fn to_step_kernel(&self) -> StepKernel {
        let scale = self.n as f64;
        StepKernel::from_flat(self.n, self.xi.iter().map(|v| v * scale).collect())
            .expect("validated matrix has finite entries")
    }
}

/// Piecewise-constant function on the uniform grid of `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("empty grid function".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite grid function entry".into()));
        }
        Ok(Self { samples })
    }

    pub fn constant(resolution: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; resolution])
    }

    pub fn resolution(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn refine(&self, resolution: usize) -> Result<Self> {
        let m = self.samples.len();
        if resolution % m != 0 {
            return Err(Error::InvalidArgument(format!("cannot refine {m} cells to {resolution}")));
        }
        let factor = resolution / m;
        Ok(Self {
            samples: (0..resolution).map(|i| self.samples[i / factor]).collect(),
        })
    }
}

/// `ξ_ij = G((i + ½)/N, (j + ½)/N) / N`.
pub fn interaction_from_graphon(g: &Graphon, n: usize) -> Result<InteractionMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let h = 1.0 / n as f64;
    let xi = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            g.value_at((i as f64 + 0.5) * h, (j as f64 + 0.5) * h) * h
        })
        .collect();
    InteractionMatrix::new(n, xi)
}

/// Symmetric Bernoulli adjacency `A_ij ~ Bernoulli(G(midpoints))`, scaled by `1/N`.
pub fn sample_bernoulli_matrix(g: &Graphon, n: usize, seed: u64) -> Result<InteractionMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let rng = CounterRng::new(seed);
    let h = 1.0 / n as f64;
    let mut xi = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let p = g.value_at((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            if rng.uniform(stream::BERNOULLI, 0, i as u32, j as u32) < p {
                xi[i * n + j] = h;
                xi[j * n + i] = h;
            }
        }
    }
    InteractionMatrix::new(n, xi)
}

/// `sup_u ∫ |G₁(u,v) − G₂(u,v)| dv`, exact for step kernels.
pub fn dist_sup_l1(g1: &StepKernel, g2: &StepKernel) -> Result<f64> {
    dist_sup_l1_with_cap(g1, g2, DEFAULT_RESOLUTION_CAP)
}

pub fn dist_sup_l1_with_cap(g1: &StepKernel, g2: &StepKernel, cap: usize) -> Result<f64> {
    let m = common_resolution(g1.blocks(), g2.blocks(), cap)?;
    let (a, b) = (g1.refine(m)?, g2.refine(m)?);
    Ok((0..m)
        .map(|i| a.row(i).iter().zip(b.row(i)).map(|(x, y)| (x - y).abs()).sum::<f64>() / m as f64)
        .fold(0.0, f64::max))
}

/// Best `|Σ_{j∈B} s_j|` over column sets `B` for fixed column sums `s`.
#[inline]
fn best_response(sums: &[f64]) -> f64 {
    let (pos, neg) = sums.iter().fold((0.0, 0.0), |(p, n), &s| {
        if s > 0.0 {
            (p + s, n)
        } else {
            (p, n - s)
        }
    });
    f64::max(pos, neg)
}

/// Exact cut norm of a step kernel.
///
/// For a step kernel the supremum over measurable rectangles is attained on
/// block-aligned sets. Row sets are enumerated in Gray-code order and the
/// optimal column set is read off the signs of the column sums, so the cost is
/// `O(2^m · m)`.
pub fn cut_norm_exact(k: &StepKernel) -> Result<f64> {
    let m = k.blocks();
    if m > MAX_EXHAUSTIVE_BLOCKS {
        return Err(Error::CutNormTooLarge { blocks: m, max: MAX_EXHAUSTIVE_BLOCKS });
    }
    let mut col_sums = vec![0.0; m];
    let mut member = vec![false; m];
    let mut best: f64 = 0.0;
    for step in 1u64..(1u64 << m) {
        let flip = step.trailing_zeros() as usize;
        let sign = if member[flip] { -1.0 } else { 1.0 };
        member[flip] = !member[flip];
        for (s, v) in col_sums.iter_mut().zip(k.row(flip)) {
            *s += sign * v;
        }
        best = best.max(best_response(&col_sums));
    }
    Ok(best / (m * m) as f64)
}

/// Randomized alternating local search for a lower bound on the cut norm.
///
/// Restart `t` starts from a row set drawn from `(seed, t)`, so the result is
/// the running maximum over a fixed sequence of restarts and is nondecreasing
/// in `iterations`.
pub fn cut_norm_lower_bound(k: &StepKernel, iterations: usize, seed: u64) -> Result<f64> {
    if iterations == 0 {
        return Err(Error::InvalidArgument("iterations must be at least 1".into()));
    }
    let m = k.blocks();
    let rng = CounterRng::new(seed);
    let mut best: f64 = 0.0;
    let mut rows = vec![false; m];
    let mut cols = vec![false; m];
    let mut sums = vec![0.0; m];
    for t in 0..iterations {
        for (i, r) in rows.iter_mut().enumerate() {
            *r = rng.uniform(stream::CUT_SEARCH, t as u32, i as u32, 0) < 0.5;
        }
        let mut current: f64 = 0.0;
        for _ in 0..200 {
            // columns given rows
            for (j, s) in sums.iter_mut().enumerate() {
                *s = (0..m).filter(|&i| rows[i]).map(|i| k.get(i, j)).sum();
            }
            choose_by_sign(&sums, &mut cols);
            // rows given columns
            for (i, s) in sums.iter_mut().enumerate() {
                *s = (0..m).filter(|&j| cols[j]).map(|j| k.get(i, j)).sum();
            }
            let value = choose_by_sign(&sums, &mut rows);
            if value <= current * (1.0 + 1e-15) {
                current = current.max(value);
                break;
            }
            current = value;
        }
        best = best.max(current);
    }
    Ok(best / (m * m) as f64)
}

fn choose_by_sign(sums: &[f64], set: &mut [bool]) -> f64 {
    let (pos, neg): (f64, f64) = sums.iter().fold((0.0, 0.0), |(p, n), &s| {
        (p + s.max(0.0), n + (-s).max(0.0))
    });
    let keep_positive = pos >= neg;
    for (flag, &s) in set.iter_mut().zip(sums) {
        *flag = if keep_positive { s > 0.0 } else { s < 0.0 };
    }
    pos.max(neg)
}

fn common_operands(k: &StepKernel, f: &GridFunction) -> Result<(StepKernel, GridFunction)> {
    let m = common_resolution(k.blocks(), f.resolution(), DEFAULT_RESOLUTION_CAP)?;
    Ok((k.refine(m)?, f.refine(m)?))
}

/// `(𝒜f)(u) = ∫₀¹ G(u, v) f(v) dv`.
pub fn kernel_apply(k: &StepKernel, f: &GridFunction) -> Result<GridFunction> {
    let (k, f) = common_operands(k, f)?;
    let m = k.blocks() as f64;
    GridFunction::new(
        (0..k.blocks())
            .map(|i| k.row(i).iter().zip(f.samples()).map(|(a, b)| a * b).sum::<f64>() / m)
            .collect(),
    )
}

/// `e^{t𝒜} f` through the dense exponential of the quadrature matrix.
pub fn kernel_exponential_apply(k: &StepKernel, f: &GridFunction, t: f64) -> Result<GridFunction> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time must be nonnegative, got {t}")));
    }
    let (k, f) = common_operands(k, f)?;
    if t == 0.0 {
        return Ok(f);
    }
    let propagator = (k.quadrature_matrix() * t).exp();
    let out = propagator * DVector::from_column_slice(f.samples());
    GridFunction::new(out.iter().copied().collect())
}
