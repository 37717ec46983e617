//! Subset-indexed hierarchy for `Z_v = αH_v + I_v`.
//!
//! For `v ⊆ [N]` the generator `𝒜F(v) = Σ_{i∈v} Σ_{k∉v} ξ_ik (F(v ∪ {k}) − F(v))`
//! only couples a set to its one-element supersets, so the linear system
//! `ż_v = 𝒜z(v) + c·C(v)` is triangular in the cardinality of `v`. The solver
//! integrates cardinality classes from `[N]` downwards, each class reading the
//! stored Runge-Kutta stage values of the class above; the result is the same
//! as running classical RK4 on the whole system at once, which is kept as a
//! second route for memory-heavy problems and for cross-checking.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphon::InteractionMatrix;

/// Largest `N` for a dense lattice of subsets.
pub const MAX_DENSE_PARTICLES: usize = 20;

/// Largest `N` representable by a subset bitmask.
pub const MAX_PARTICLES: usize = 32;

/// Stage storage above which the triangular solver defers to the simultaneous one.
const TRIANGULAR_BUDGET: usize = 1 << 25;

/// Bitmask of particle indices; bit `i` set means particle `i` is in the set.
pub type Subset = u32;

pub fn subset_from_indices(indices: &[usize], n: usize) -> Result<Subset> {
    let mut mask = 0;
    for &i in indices {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        mask |= 1 << i;
    }
    Ok(mask)
}

pub fn subset_indices(v: Subset) -> Vec<usize> {
    (0..MAX_PARTICLES).filter(|i| v >> i & 1 == 1).collect()
}

/// The first `k` particles, `[k] = {0, …, k − 1}`.
pub fn prefix(k: usize) -> Subset {
    if k >= 32 {
        u32::MAX
    } else {
        (1u32 << k) - 1
    }
}

fn full_set(n: usize) -> Subset {
    prefix(n)
}

/// Real function on every superset of `base` within `[N]` (all subsets when
/// `base` is empty; the empty set itself is carried but never used).
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetFunction {
    n: usize,
    base: Subset,
    free: Vec<usize>,
    values: Vec<f64>,
}

impl SubsetFunction {
    fn layout(n: usize, base: Subset) -> Result<Vec<usize>> {
        if n == 0 || n > MAX_PARTICLES {
            return Err(Error::SubsetCap { n, cap: MAX_PARTICLES });
        }
        if base & !full_set(n) != 0 {
            return Err(Error::InvalidArgument("base set has members outside [N]".into()));
        }
        let free: Vec<usize> = (0..n).filter(|i| base >> i & 1 == 0).collect();
        if free.len() > MAX_DENSE_PARTICLES {
            return Err(Error::SubsetCap { n, cap: MAX_DENSE_PARTICLES });
        }
        Ok(free)
    }

    /// Every subset of `[N]`, `N ≤ 20`.
    pub fn dense(n: usize, f: impl Fn(Subset) -> f64) -> Result<Self> {
        Self::supersets_of(n, 0, f)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::dense(n, |_| 0.0)
    }

    /// Supersets of `base` only; at most 20 particles outside `base`.
    pub fn supersets_of(n: usize, base: Subset, f: impl Fn(Subset) -> f64) -> Result<Self> {
        let free = Self::layout(n, base)?;
        let values: Vec<f64> = (0..1usize << free.len()).map(|idx| f(deposit(base, &free, idx))).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("subset function values must be finite".into()));
        }
        Ok(Self { n, base, free, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> Subset {
        self.base
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, v: Subset) -> bool {
        v & self.base == self.base && v & !full_set(self.n) == 0
    }

    fn index(&self, v: Subset) -> usize {
        self.free.iter().enumerate().fold(0, |acc, (bit, &i)| acc | ((v as usize >> i & 1) << bit))
    }

    pub fn get(&self, v: Subset) -> Option<f64> {
        self.contains(v).then(|| self.values[self.index(v)])
    }

    pub fn set(&mut self, v: Subset, value: f64) -> Result<()> {
        if !self.contains(v) {
            return Err(Error::InvalidArgument(format!("set {v:#b} is outside the family")));
        }
        let idx = self.index(v);
        self.values[idx] = value;
        Ok(())
    }

    /// `(set, value)` pairs in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (Subset, f64)> + '_ {
        self.values.iter().enumerate().map(|(idx, &v)| (deposit(self.base, &self.free, idx), v))
    }
}

fn deposit(base: Subset, free: &[usize], idx: usize) -> Subset {
    free.iter().enumerate().fold(base, |acc, (bit, &i)| acc | (((idx >> bit) & 1) as Subset) << i)
}

fn check_subset(xi: &InteractionMatrix, v: Subset) -> Result<()> {
    if v == 0 {
        return Err(Error::EmptySubset);
    }
    let n = xi.n();
    if n > MAX_PARTICLES {
        return Err(Error::SubsetCap { n, cap: MAX_PARTICLES });
    }
    if v & !full_set(n) != 0 {
        return Err(Error::IndexOutOfRange { index: 31 - v.leading_zeros() as usize, len: n });
    }
    Ok(())
}

/// `𝒜F(v)`; zero at `v = [N]`.
pub fn subset_generator_apply(xi: &InteractionMatrix, f: &SubsetFunction, v: Subset) -> Result<f64> {
    check_subset(xi, v)?;
    if f.n() != xi.n() {
        return Err(Error::DimensionMismatch { expected: xi.n(), got: f.n() });
    }
    let fv = f.get(v).ok_or_else(|| Error::InvalidArgument("set outside the function's family".into()))?;
    let members = subset_indices(v);
    let mut total = 0.0;
    for k in (0..xi.n()).filter(|k| v >> k & 1 == 0) {
        let weight: f64 = members.iter().map(|&i| xi.get(i, k)).sum();
        if weight != 0.0 {
            total += weight * (f.get(v | 1 << k).expect("supersets stay in the family") - fv);
        }
    }
    Ok(total)
}

/// `C(v) = Σ_{i∈v} (Σ_{j∈v} ξ_ij)²`.
pub fn source_term(xi: &InteractionMatrix, v: Subset) -> Result<f64> {
    check_subset(xi, v)?;
    let members = subset_indices(v);
    Ok(members
        .iter()
        .map(|&i| members.iter().map(|&j| xi.get(i, j)).sum::<f64>().powi(2))
        .sum())
}

/// Independence envelope for the subset `v`:
/// `(δ|v| + 1)(Σ_{v²} ξ_ij² + δ Σ_{v²} (ξᵀξ + ξξᵀ)_ij + δ²|v|)` with
/// `δ = max_{v²} ξ_ij`.
pub fn independence_bound(xi: &InteractionMatrix, v: Subset) -> Result<f64> {
    check_subset(xi, v)?;
    independence_bound_indices(xi, &subset_indices(v))
}

/// `independence_bound` for a subset given as distinct indices, for any `N`.
pub fn independence_bound_indices(xi: &InteractionMatrix, members: &[usize]) -> Result<f64> {
    let n = xi.n();
    if members.is_empty() {
        return Err(Error::EmptySubset);
    }
    if let Some(&index) = members.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index, len: n });
    }
    let k = members.len() as f64;
    let mut delta = 0.0f64;
    let mut squares = 0.0;
    let mut cross = 0.0;
    for &i in members {
        for &j in members {
            let x = xi.get(i, j);
            delta = delta.max(x);
            squares += x * x;
            // (ξᵀξ)_ij = Σ_l ξ_li ξ_lj, (ξξᵀ)_ij = Σ_l ξ_il ξ_jl
            cross += (0..n).map(|l| xi.get(l, i) * xi.get(l, j) + xi.get(i, l) * xi.get(j, l)).sum::<f64>();
        }
    }
    Ok((delta * k + 1.0) * (squares + delta * cross + delta * delta * k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HierarchyMethod {
    /// Triangular unless the stored stages exceed the memory budget.
    #[default]
    Auto,
    Triangular,
    Simultaneous,
}

/// Per-set coefficients: `ż_v = Σ_k w_vk z_{v∪k} − λ_v z_v + c C(v)`.
struct Coupling {
    targets: Vec<Vec<(usize, f64)>>,
    decay: Vec<f64>,
    source: Vec<f64>,
}

fn coupling(xi: &InteractionMatrix, family: &SubsetFunction, c_scale: f64) -> Coupling {
    let n = xi.n();
    let sets: Vec<Subset> = family.iter().map(|(v, _)| v).collect();
    let rows: Vec<(Vec<(usize, f64)>, f64, f64)> = sets
        .par_iter()
        .map(|&v| {
            if v == 0 {
                return (Vec::new(), 0.0, 0.0);
            }
            let members = subset_indices(v);
            let mut targets = Vec::new();
            let mut decay = 0.0;
            for k in (0..n).filter(|k| v >> k & 1 == 0) {
                let w: f64 = members.iter().map(|&i| xi.get(i, k)).sum();
                if w != 0.0 {
                    targets.push((family.index(v | 1 << k), w));
                    decay += w;
                }
            }
            let c = members
                .iter()
                .map(|&i| members.iter().map(|&j| xi.get(i, j)).sum::<f64>().powi(2))
                .sum::<f64>();
            (targets, decay, c_scale * c)
        })
        .collect();
    let mut out = Coupling { targets: Vec::new(), decay: Vec::new(), source: Vec::new() };
    for (t, d, s) in rows {
        out.targets.push(t);
        out.decay.push(d);
        out.source.push(s);
    }
    out
}

#[inline]
fn rhs(c: &Coupling, idx: usize, own: f64, upper: impl Fn(usize) -> f64) -> f64 {
    let mut acc = c.source[idx] - c.decay[idx] * own;
    for &(t, w) in &c.targets[idx] {
        acc += w * upper(t);
    }
    acc
}

fn step_count(t_final: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0 && dt.is_finite() && t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidArgument(format!("need dt > 0 and T ≥ 0, got dt={dt}, T={t_final}")));
    }
    let steps = ((t_final / dt) - 1e-9).ceil().max(0.0) as usize;
    Ok((steps, if steps == 0 { 0.0 } else { t_final / steps as f64 }))
}

/// Solves `ż_v = 𝒜z(v) + c_scale · C(v)` from `z0` to time `T` with RK4 steps of about `dt`.
pub fn solve_hierarchy_ode(
    xi: &InteractionMatrix,
    z0: &SubsetFunction,
    c_scale: f64,
    t_final: f64,
    dt: f64,
) -> Result<SubsetFunction> {
    solve_hierarchy_ode_with(xi, z0, c_scale, t_final, dt, HierarchyMethod::Auto)
}

pub fn solve_hierarchy_ode_with(
    xi: &InteractionMatrix,
    z0: &SubsetFunction,
    c_scale: f64,
    t_final: f64,
    dt: f64,
    method: HierarchyMethod,
) -> Result<SubsetFunction> {
    if z0.n() != xi.n() {
        return Err(Error::DimensionMismatch { expected: xi.n(), got: z0.n() });
    }
    if !c_scale.is_finite() {
        return Err(Error::InvalidArgument("c_scale must be finite".into()));
    }
    let (steps, h) = step_count(t_final, dt)?;
    let c = coupling(xi, z0, c_scale);
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); z0.free.len() + 1];
    for (idx, (v, _)) in z0.iter().enumerate() {
        if v != 0 {
            classes[(v & !z0.base).count_ones() as usize].push(idx);
        }
    }
    let widest = classes.windows(2).map(|w| w[0].len() + w[1].len()).max().unwrap_or(0);
    let triangular = match method {
        HierarchyMethod::Triangular => true,
        HierarchyMethod::Simultaneous => false,
        HierarchyMethod::Auto => widest.saturating_mul(4 * steps + 1) <= TRIANGULAR_BUDGET,
    };
    let values = if triangular {
        solve_triangular(&c, &classes, &z0.values, steps, h)
    } else {
        solve_simultaneous(&c, &z0.values, steps, h)
    };
    Ok(SubsetFunction { values, ..z0.clone() })
}

/// Classical RK4 on the whole family.
fn solve_simultaneous(c: &Coupling, z0: &[f64], steps: usize, h: f64) -> Vec<f64> {
    let mut z = z0.to_vec();
    let len = z.len();
    let eval = |state: &[f64]| -> Vec<f64> {
        (0..len).into_par_iter().map(|i| rhs(c, i, state[i], |t| state[t])).collect()
    };
    for _ in 0..steps {
        let k1 = eval(&z);
        let y2: Vec<f64> = z.iter().zip(&k1).map(|(a, k)| a + 0.5 * h * k).collect();
        let k2 = eval(&y2);
        let y3: Vec<f64> = z.iter().zip(&k2).map(|(a, k)| a + 0.5 * h * k).collect();
        let k3 = eval(&y3);
        let y4: Vec<f64> = z.iter().zip(&k3).map(|(a, k)| a + h * k).collect();
        let k4 = eval(&y4);
        for i in 0..len {
            z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    z
}

/// Class-by-class RK4. Each set keeps its four stage states per step, so the
/// class below sees exactly the values the simultaneous scheme would use.
fn solve_triangular(c: &Coupling, classes: &[Vec<usize>], z0: &[f64], steps: usize, h: f64) -> Vec<f64> {
    let mut z = z0.to_vec();
    // stages[idx] = [y1, y2, y3, y4] for every step of one set in the class above
    let mut above: std::collections::HashMap<usize, Vec<[f64; 4]>> = Default::default();
    for class in classes.iter().rev() {
        let prev = &above;
        let solved: Vec<(usize, f64, Vec<[f64; 4]>)> = class
            .par_iter()
            .map(|&idx| {
                let mut y = z0[idx];
                let mut trace = Vec::with_capacity(steps);
                for s in 0..steps {
                    let k1 = rhs(c, idx, y, |t| prev[&t][s][0]);
                    let y2 = y + 0.5 * h * k1;
                    let k2 = rhs(c, idx, y2, |t| prev[&t][s][1]);
                    let y3 = y + 0.5 * h * k2;
                    let k3 = rhs(c, idx, y3, |t| prev[&t][s][2]);
                    let y4 = y + h * k3;
                    let k4 = rhs(c, idx, y4, |t| prev[&t][s][3]);
                    trace.push([y, y2, y3, y4]);
                    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                }
                (idx, y, trace)
            })
            .collect();
        above = solved
            .into_iter()
            .map(|(idx, y, trace)| {
                z[idx] = y;
                (idx, trace)
            })
            .collect();
    }
    z
}

/// One line of a ratio report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub ratio: f64,
    pub bound: f64,
    pub z_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<RatioRow>,
    /// Human-readable notes on ratios exceeding the allowed multiple.
    pub flags: Vec<String>,
}

impl ComparisonReport {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Settings for `comparison_check`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonSettings {
    pub t_final: f64,
    pub dt: f64,
    pub c_scale: f64,
    /// Initial data `z0_v = init_fraction · bound(v)`, so `z0 ≤ bound`.
    pub init_fraction: f64,
    /// Ratios above this multiple of the smallest-`N` maximum are flagged.
    pub max_multiple: f64,
}

impl Default for ComparisonSettings {
    fn default() -> Self {
        Self { t_final: 1.0, dt: 1e-2, c_scale: 1.0, init_fraction: 0.0, max_multiple: 10.0 }
    }
}

/// Solves the hierarchy for each matrix and tabulates `z_[k](T) / bound([k])`.
pub fn comparison_check(matrices: &[InteractionMatrix], settings: &ComparisonSettings) -> Result<ComparisonReport> {
    if !(0.0..=1.0).contains(&settings.init_fraction) {
        return Err(Error::InvalidArgument("init_fraction must lie in [0, 1]".into()));
    }
    let mut rows = Vec::new();
    let mut reference: Option<(usize, f64)> = None;
    let mut flags = Vec::new();
    let mut ordered: Vec<&InteractionMatrix> = matrices.iter().collect();
    ordered.sort_by_key(|xi| xi.n());
    for xi in ordered {
        let n = xi.n();
        if n > MAX_DENSE_PARTICLES {
            return Err(Error::SubsetCap { n, cap: MAX_DENSE_PARTICLES });
        }
        let bound = |v: Subset| if v == 0 { Ok(0.0) } else { independence_bound(xi, v) };
        let bounds = SubsetFunction::dense(n, |v| bound(v).unwrap_or(f64::NAN))?;
        let z0 = SubsetFunction::dense(n, |v| settings.init_fraction * bounds.get(v).unwrap_or(0.0))?;
        let z = solve_hierarchy_ode(xi, &z0, settings.c_scale, settings.t_final, settings.dt)?;
        let mut worst = 0.0f64;
        for k in 1..=n {
            let v = prefix(k);
            let (b, zv) = (bounds.get(v).unwrap(), z.get(v).unwrap());
            let ratio = if b == 0.0 { 0.0 } else { zv / b };
            worst = worst.max(ratio);
            rows.push(RatioRow { n, k, ratio, bound: b, z_value: zv });
        }
        match reference {
            None => reference = Some((n, worst)),
            Some((n0, base)) if worst > settings.max_multiple * base && worst > 0.0 => flags.push(format!(
                "N={n}: max ratio {worst:.4e} exceeds {} × the N={n0} value {base:.4e}",
                settings.max_multiple
            )),
            Some(_) => {}
        }
    }
    Ok(ComparisonReport { rows, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, CounterRng};
    use approx::assert_relative_eq;

    fn random_xi(n: usize, seed: u32) -> InteractionMatrix {
        let rng = CounterRng::new(99);
        let raw: Vec<f64> = (0..n * n).map(|k| rng.uniform(stream::SAMPLING, seed, k as u32, 0)).collect();
        let rows = (0..n)
            .map(|i| {
                let s: f64 = raw[i * n..(i + 1) * n].iter().sum();
                raw[i * n..(i + 1) * n].iter().map(|x| x / s.max(1.0)).collect()
            })
            .collect();
        InteractionMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn subset_function_layout() {
        let f = SubsetFunction::supersets_of(5, 0b00101, |v| v as f64).unwrap();
        assert_eq!(f.len(), 8);
        assert!(f.contains(0b10101) && !f.contains(0b00011));
        for (v, value) in f.iter() {
            assert_eq!(value, v as f64);
            assert_eq!(f.get(v), Some(v as f64));
        }
        assert!(SubsetFunction::zeros(21).is_err());
        assert!(SubsetFunction::supersets_of(25, prefix(10), |_| 0.0).is_ok());
    }

    #[test]
    fn generator_examples() {
        let xi = InteractionMatrix::uniform(3).unwrap();
        let f = SubsetFunction::dense(3, |v| (v.count_ones() as f64).powi(2)).unwrap();
        assert_relative_eq!(subset_generator_apply(&xi, &f, 0b001).unwrap(), 2.0, epsilon = 1e-15);
        assert_eq!(subset_generator_apply(&xi, &f, 0b111).unwrap(), 0.0);
        let constant = SubsetFunction::dense(3, |_| 4.2).unwrap();
        for v in 1..8 {
            assert_eq!(subset_generator_apply(&xi, &constant, v).unwrap(), 0.0);
        }
        assert!(matches!(subset_generator_apply(&xi, &f, 0), Err(Error::EmptySubset)));
    }

    #[test]
    fn source_and_bound_examples() {
        let xi = InteractionMatrix::uniform(4).unwrap();
        assert_relative_eq!(source_term(&xi, prefix(2)).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(independence_bound(&xi, prefix(2)).unwrap(), 1.3125, epsilon = 1e-15);
        let zero = InteractionMatrix::zeros(4).unwrap();
        assert_eq!(source_term(&zero, 0b1011).unwrap(), 0.0);
        assert_eq!(independence_bound(&zero, 0b1011).unwrap(), 0.0);
        for n in [5usize, 8, 13] {
            let xi = InteractionMatrix::uniform(n).unwrap();
            for k in 1..=n {
                let (kf, nf) = (k as f64, n as f64);
                assert_relative_eq!(source_term(&xi, prefix(k)).unwrap(), kf.powi(3) / (nf * nf), max_relative = 1e-13);
                let formula = (kf / nf + 1.0) * (3.0 * kf * kf + kf) / (nf * nf);
                assert_relative_eq!(independence_bound(&xi, prefix(k)).unwrap(), formula, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn bound_envelope_for_large_graphon_matrices() {
        let g = crate::graphon::Graphon::sample(8, |u, v| 0.5 + 0.5 * (u * v).sqrt()).unwrap();
        for n in [16usize, 64, 256, 512] {
            let xi = crate::graphon::interaction_from_graphon(&g, n).unwrap();
            for k in [1usize, 2, 4, 16] {
                let (kf, nf) = (k as f64, n as f64);
                let b = independence_bound_indices(&xi, &(0..k).collect::<Vec<_>>()).unwrap();
                assert!(b <= (kf / nf + 1.0) * (3.0 * kf * kf + kf) / (nf * nf) * (1.0 + 1e-12));
                assert!(b <= 8.0 * kf * kf / (nf * nf));
            }
        }
    }

    #[test]
    fn pair_closed_form() {
        let xi = InteractionMatrix::uniform(2).unwrap();
        let z = solve_hierarchy_ode(&xi, &SubsetFunction::zeros(2).unwrap(), 1.0, 1.0, 1e-3).unwrap();
        // C([2]) = 2, C({1}) = 1/4 and ż₁ = ½(2t − z₁) + ¼ give z₁(t) = 2t − 7/2 + 7/2 e^{−t/2}
        assert_relative_eq!(z.get(0b11).unwrap(), 2.0, epsilon = 1e-12);
        let exact = 2.0 - 3.5 + 3.5 * (-0.5f64).exp();
        assert!((z.get(0b01).unwrap() - exact).abs() < 1e-8);
        assert!((z.get(0b10).unwrap() - exact).abs() < 1e-8);
    }

    #[test]
    fn trivial_solutions() {
        let xi = random_xi(5, 1);
        let z = solve_hierarchy_ode(&xi, &SubsetFunction::zeros(5).unwrap(), 0.0, 1.0, 1e-2).unwrap();
        assert!(z.iter().all(|(_, v)| v == 0.0));
        let zero = InteractionMatrix::zeros(5).unwrap();
        let z0 = SubsetFunction::dense(5, |v| v as f64 * 0.1).unwrap();
        assert_eq!(solve_hierarchy_ode(&zero, &z0, 1.0, 1.0, 1e-2).unwrap(), z0);
    }

    #[test]
    fn triangular_matches_simultaneous() {
        for seed in 0..5 {
            let xi = random_xi(7, seed);
            let z0 = SubsetFunction::dense(7, |v| (v % 7) as f64 * 0.01).unwrap();
            let a = solve_hierarchy_ode_with(&xi, &z0, 1.0, 1.0, 1e-2, HierarchyMethod::Triangular).unwrap();
            let b = solve_hierarchy_ode_with(&xi, &z0, 1.0, 1.0, 1e-2, HierarchyMethod::Simultaneous).unwrap();
            for ((_, x), (_, y)) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
    }

    #[test]
    fn restricted_family_matches_dense() {
        let xi = random_xi(8, 3);
        let dense = solve_hierarchy_ode(&xi, &SubsetFunction::zeros(8).unwrap(), 1.0, 0.7, 1e-2).unwrap();
        let base = 0b0000_0101;
        let restricted =
            solve_hierarchy_ode(&xi, &SubsetFunction::supersets_of(8, base, |_| 0.0).unwrap(), 1.0, 0.7, 1e-2).unwrap();
        for (v, value) in restricted.iter() {
            assert_eq!(value, dense.get(v).unwrap());
        }
    }

    #[test]
    fn comparison_principle_and_positivity() {
        let rng = CounterRng::new(4);
        for case in 0..100u32 {
            let n = 2 + case as usize % 5;
            let xi = random_xi(n, 100 + case);
            let z0 = SubsetFunction::dense(n, |v| rng.uniform(stream::SAMPLING, case, v, 0)).unwrap();
            let w0 = SubsetFunction::dense(n, |v| z0.get(v).unwrap() + rng.uniform(stream::SAMPLING, case, v, 1)).unwrap();
            let z = solve_hierarchy_ode(&xi, &z0, 1.0, 1.0, 1e-2).unwrap();
            let w = solve_hierarchy_ode(&xi, &w0, 1.0, 1.0, 1e-2).unwrap();
            for ((_, a), (_, b)) in z.iter().zip(w.iter()) {
                assert!(a >= 0.0 && a <= b);
            }
            let doubled = SubsetFunction::dense(n, |v| 2.0 * z0.get(v).unwrap()).unwrap();
            let zd = solve_hierarchy_ode(&xi, &doubled, 1.0, 1.0, 1e-2).unwrap();
            for ((_, a), (_, b)) in zd.iter().zip(z.iter()) {
                assert!(a <= 2.0 * b + 1e-12);
            }
        }
    }

    #[test]
    fn comparison_report() {
        let mats: Vec<InteractionMatrix> = [10usize, 4, 8, 6].iter().map(|&n| InteractionMatrix::uniform(n).unwrap()).collect();
        let report = comparison_check(&mats, &ComparisonSettings::default()).unwrap();
        assert_eq!(report.rows.len(), 4 + 6 + 8 + 10);
        assert_eq!(report.rows[0].n, 4);
        assert!(report.flags.is_empty());
        assert!(report.rows.iter().all(|r| r.ratio.is_finite() && r.ratio >= 0.0));
        let zero = comparison_check(&[InteractionMatrix::zeros(3).unwrap()], &ComparisonSettings::default()).unwrap();
        assert!(zero.rows.iter().all(|r| r.ratio == 0.0));
        let dir = tempfile::tempdir().unwrap();
        report.write_csv(dir.path().join("r.csv")).unwrap();
        let text = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
        assert!(text.starts_with("N,k,ratio,bound,z_value"));
    }
}
