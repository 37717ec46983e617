//! Exact Gaussian laws for the linear kernel `β(r) = −a r`.
//!
//! The interacting system is a linear SDE, so its joint law stays Gaussian with
//! mean `ṁ = Dm` and covariance `Σ̇ = DΣ + ΣDᵀ + I`. The independent projection
//! shares the mean ODE and has decoupled per-particle covariances. Relative
//! entropy and relative Fisher information between Gaussians are closed forms,
//! which makes this module the reference against which everything else is checked.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graphon::InteractionMatrix;

/// Covariance used in place of a point mass.
pub const DETERMINISTIC_VARIANCE: f64 = 1e-8;

/// Largest condition number accepted by the closed forms.
pub const MAX_CONDITION: f64 = 1e12;

fn check_spd(cov: &DMatrix<f64>) -> Result<()> {
    if !cov.is_square() {
        return Err(Error::DimensionMismatch { expected: cov.nrows(), got: cov.ncols() });
    }
    let scale = cov.amax().max(1.0);
    for i in 0..cov.nrows() {
        for j in 0..i {
            if (cov[(i, j)] - cov[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::NotPositiveDefinite);
            }
        }
    }
    if cov.iter().any(|v| !v.is_finite()) || Cholesky::new(cov.clone()).is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(())
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLaw {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianLaw {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if mean.is_empty() {
            return Err(Error::InvalidArgument("Gaussian law needs dimension ≥ 1".into()));
        }
        if cov.nrows() != mean.len() {
            return Err(Error::DimensionMismatch { expected: mean.len(), got: cov.nrows() });
        }
        check_spd(&cov)?;
        Ok(Self { mean, cov })
    }

    pub fn standard(dim: usize) -> Result<Self> {
        Self::new(DVector::zeros(dim), DMatrix::identity(dim, dim))
    }

    pub fn scalar(mean: f64, var: f64) -> Result<Self> {
        Self::new(DVector::from_element(1, mean), DMatrix::from_element(1, 1, var))
    }

    /// Independent product of laws, as a block-diagonal Gaussian.
    pub fn product(laws: &[GaussianLaw]) -> Result<Self> {
        let dim: usize = laws.iter().map(|l| l.dim()).sum();
        let mut mean = DVector::zeros(dim);
        let mut cov = DMatrix::zeros(dim, dim);
        let mut at = 0;
        for l in laws {
            let d = l.dim();
            mean.rows_mut(at, d).copy_from(&l.mean);
            cov.view_mut((at, at), (d, d)).copy_from(&l.cov);
            at += d;
        }
        Self::new(mean, cov)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Log-density at `x`.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        let chol = Cholesky::new(self.cov.clone()).expect("validated SPD");
        let diff = DVector::from_column_slice(x) - &self.mean;
        let z = chol.l().solve_lower_triangular(&diff).expect("nonsingular factor");
        let log_det: f64 = chol.l().diagonal().iter().map(|v| 2.0 * v.ln()).sum();
        -0.5 * (z.norm_squared() + log_det + self.dim() as f64 * (std::f64::consts::TAU).ln())
    }
}

/// Joint law of `N` particles in `ℝ^d`; coordinates ordered particle-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointGaussianState {
    n: usize,
    d: usize,
    law: GaussianLaw,
    time: f64,
}

impl JointGaussianState {
    pub fn new(n: usize, d: usize, mean: DVector<f64>, cov: DMatrix<f64>, time: f64) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidArgument("need N ≥ 1 and d ≥ 1".into()));
        }
        if mean.len() != n * d {
            return Err(Error::DimensionMismatch { expected: n * d, got: mean.len() });
        }
        Ok(Self { n, d, law: GaussianLaw::new(mean, cov)?, time })
    }

    /// Product of per-particle laws at time zero.
    pub fn from_product(marginals: &[GaussianLaw]) -> Result<Self> {
        let d = marginals.first().ok_or(Error::EmptySubset)?.dim();
        if let Some(bad) = marginals.iter().find(|l| l.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: bad.dim() });
        }
        Ok(Self { n: marginals.len(), d, law: GaussianLaw::product(marginals)?, time: 0.0 })
    }

    /// Deterministic start, regularized to covariance `DETERMINISTIC_VARIANCE · I`.
    pub fn deterministic(n: usize, d: usize, point: &[f64]) -> Result<Self> {
        let cov = DMatrix::identity(n * d, n * d) * DETERMINISTIC_VARIANCE;
        Self::new(n, d, DVector::from_column_slice(point), cov, 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn law(&self) -> &GaussianLaw {
        &self.law
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.law.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.law.cov
    }

    /// Law of one particle.
    pub fn marginal(&self, i: usize) -> Result<GaussianLaw> {
        marginal_subset(self, &[i])
    }

    pub fn marginals(&self) -> Result<Vec<GaussianLaw>> {
        (0..self.n).map(|i| self.marginal(i)).collect()
    }
}

/// `D` with `D_ij = a ξ_ij` off the diagonal and zero row sums.
///
/// The `j = i` term of `Σ_j ξ_ij β(X_i − X_j)` vanishes, so the diagonal only
/// collects the off-diagonal weights.
pub fn drift_matrix(xi: &InteractionMatrix, rate: f64) -> DMatrix<f64> {
    let n = xi.n();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if j != i {
                d[(i, j)] = rate * xi.get(i, j);
                diag += xi.get(i, j);
            }
        }
        d[(i, i)] = -rate * diag;
    }
    d
}

fn kron_identity(m: &DMatrix<f64>, d: usize) -> DMatrix<f64> {
    if d == 1 {
        return m.clone();
    }
    m.kronecker(&DMatrix::<f64>::identity(d, d))
}

fn step_count(t_final: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidArgument(format!("need dt > 0 and T ≥ 0, got dt={dt}, T={t_final}")));
    }
    if t_final == 0.0 {
        return Ok((0, 0.0));
    }
    let steps = ((t_final / dt) - 1e-9).ceil().max(1.0) as usize;
    Ok((steps, t_final / steps as f64))
}

fn rk4_mean(drift: &DMatrix<f64>, mean: &mut DVector<f64>, h: f64) {
    let k1 = drift * &*mean;
    let k2 = drift * (&*mean + &k1 * (0.5 * h));
    let k3 = drift * (&*mean + &k2 * (0.5 * h));
    let k4 = drift * (&*mean + &k3 * h);
    *mean += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
}

fn lyapunov_rhs(drift: &DMatrix<f64>, cov: &DMatrix<f64>, out: &mut DMatrix<f64>) {
    let x = drift * cov;
    out.copy_from(&x);
    *out += x.transpose();
    for i in 0..out.nrows() {
        out[(i, i)] += 1.0;
    }
}

fn rk4_lyapunov(drift: &DMatrix<f64>, cov: &mut DMatrix<f64>, h: f64) {
    let n = cov.nrows();
    let (mut k1, mut k2, mut k3, mut k4) =
        (DMatrix::zeros(n, n), DMatrix::zeros(n, n), DMatrix::zeros(n, n), DMatrix::zeros(n, n));
    lyapunov_rhs(drift, cov, &mut k1);
    lyapunov_rhs(drift, &(&*cov + &k1 * (0.5 * h)), &mut k2);
    lyapunov_rhs(drift, &(&*cov + &k2 * (0.5 * h)), &mut k3);
    lyapunov_rhs(drift, &(&*cov + &k3 * h), &mut k4);
    *cov += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    symmetrize(cov);
}

fn check_rate(rate: f64) -> Result<()> {
    if rate > 0.0 && rate.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("rate must be positive, got {rate}")))
    }
}

/// Exact law of the interacting linear system at `init.time() + T`.
pub fn evolve_interacting_gaussian(
    xi: &InteractionMatrix,
    rate: f64,
    init: &JointGaussianState,
    t_final: f64,
    dt: f64,
) -> Result<JointGaussianState> {
    check_rate(rate)?;
    if xi.n() != init.n {
        return Err(Error::DimensionMismatch { expected: init.n, got: xi.n() });
    }
    let (steps, h) = step_count(t_final, dt)?;
    let drift = kron_identity(&drift_matrix(xi, rate), init.d);
    let mut mean = init.law.mean.clone();
    let mut cov = init.law.cov.clone();
    for _ in 0..steps {
        rk4_mean(&drift, &mut mean, h);
        rk4_lyapunov(&drift, &mut cov, h);
    }
    JointGaussianState::new(init.n, init.d, mean, cov, init.time + t_final)
}

/// Marginal laws of the independent projection at time `T`.
///
/// Particle `i` feels `−a Σ_j ξ_ij (y − m_j(t))`, including the `j = i` term,
/// so its covariance solves `Ṡ = −2a (Σ_j ξ_ij) S + I` while the means follow
/// the same linear ODE as the interacting system.
pub fn evolve_projection_gaussian(
    xi: &InteractionMatrix,
    rate: f64,
    init_marginals: &[GaussianLaw],
    t_final: f64,
    dt: f64,
) -> Result<Vec<GaussianLaw>> {
    check_rate(rate)?;
    if xi.n() != init_marginals.len() {
        return Err(Error::DimensionMismatch { expected: init_marginals.len(), got: xi.n() });
    }
    let d = init_marginals.first().ok_or(Error::EmptySubset)?.dim();
    if let Some(bad) = init_marginals.iter().find(|l| l.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: bad.dim() });
    }
    let (steps, h) = step_count(t_final, dt)?;
    let drift = kron_identity(&drift_matrix(xi, rate), d);
    let mut mean = DVector::zeros(xi.n() * d);
    for (i, l) in init_marginals.iter().enumerate() {
        mean.rows_mut(i * d, d).copy_from(l.mean());
    }
    for _ in 0..steps {
        rk4_mean(&drift, &mut mean, h);
    }
    init_marginals
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let lambda = -2.0 * rate * xi.row_sum(i);
            let identity = DMatrix::<f64>::identity(d, d);
            let mut s = l.cov().clone();
            let f = |s: &DMatrix<f64>| s * lambda + &identity;
            for _ in 0..steps {
                let k1 = f(&s);
                let k2 = f(&(&s + &k1 * (0.5 * h)));
                let k3 = f(&(&s + &k2 * (0.5 * h)));
                let k4 = f(&(&s + &k3 * h));
                s += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            }
            GaussianLaw::new(mean.rows(i * d, d).into_owned(), s)
        })
        .collect()
}

fn check_subset(v: &[usize], n: usize) -> Result<()> {
    if v.is_empty() {
        return Err(Error::EmptySubset);
    }
    if let Some(&index) = v.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index, len: n });
    }
    Ok(())
}

fn coordinates(v: &[usize], d: usize) -> Vec<usize> {
    v.iter().flat_map(|&i| (i * d)..(i * d + d)).collect()
}

/// Law of the particles in `v`, in the order given.
pub fn marginal_subset(joint: &JointGaussianState, v: &[usize]) -> Result<GaussianLaw> {
    check_subset(v, joint.n)?;
    let idx = coordinates(v, joint.d);
    let mean = joint.law.mean.select_rows(idx.iter());
    let cov = joint.law.cov.select_rows(idx.iter()).select_columns(idx.iter());
    GaussianLaw::new(mean, cov)
}

fn condition_number(cov: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(cov.clone()).eigenvalues;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v.abs())));
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

fn guard_condition(cov: &DMatrix<f64>) -> Result<()> {
    let c = condition_number(cov);
    if c > MAX_CONDITION {
        Err(Error::IllConditioned(c))
    } else {
        Ok(())
    }
}

/// Whitened pieces shared by both closed forms: `W = L_q⁻¹`, the spectrum of
/// `M = W Σ_p Wᵀ`, and the whitened mean shift `W (m_p − m_q)`.
struct Whitened {
    w: DMatrix<f64>,
    eig: SymmetricEigen<f64, nalgebra::Dyn>,
    shift: DVector<f64>,
}

fn whiten(p: &GaussianLaw, q: &GaussianLaw) -> Result<Whitened> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: q.dim(), got: p.dim() });
    }
    guard_condition(&q.cov)?;
    let chol = Cholesky::new(q.cov.clone()).ok_or(Error::NotPositiveDefinite)?;
    let dim = p.dim();
    let w = chol
        .l()
        .solve_lower_triangular(&DMatrix::identity(dim, dim))
        .ok_or(Error::NotPositiveDefinite)?;
    let mut m = &w * &p.cov * w.transpose();
    symmetrize(&mut m);
    let shift = &w * (&p.mean - &q.mean);
    Ok(Whitened { w, eig: SymmetricEigen::new(m), shift })
}

/// `H(p | q)` for Gaussian laws.
pub fn relative_entropy_gaussian(p: &GaussianLaw, q: &GaussianLaw) -> Result<f64> {
    let wh = whiten(p, q)?;
    // tr M − dim − log det M = Σ (λ − 1 − log λ), each term ≥ 0
    let spectral: f64 = wh
        .eig
        .eigenvalues
        .iter()
        .map(|&l| {
            let x = l - 1.0;
            (x - x.ln_1p()).max(0.0)
        })
        .sum();
    Ok(0.5 * (spectral + wh.shift.norm_squared()))
}

/// `I(p | q) = E_p ‖∇ log(p/q)‖²` for Gaussian laws.
pub fn relative_fisher_gaussian(p: &GaussianLaw, q: &GaussianLaw) -> Result<f64> {
    guard_condition(&p.cov)?;
    let wh = whiten(p, q)?;
    // A Σ_p A = Wᵀ U diag((λ − 1)²/λ) Uᵀ W, written without cancellation
    let u = &wh.eig.eigenvectors;
    let weights = wh.eig.eigenvalues.map(|l| (l - 1.0).powi(2) / l);
    let uw = u.transpose() * &wh.w;
    let mut trace = 0.0;
    for r in 0..uw.nrows() {
        trace += weights[r] * uw.row(r).norm_squared();
    }
    let c = wh.w.transpose() * &wh.shift;
    Ok(trace + c.norm_squared())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsetInfo {
    pub entropy: f64,
    pub fisher: f64,
}

impl SubsetInfo {
    pub fn total(&self) -> f64 {
        self.entropy + self.fisher
    }
}

/// `H` and `I` of the joint marginal on `v` relative to the product of the
/// corresponding projection marginals.
pub fn subset_info(joint: &JointGaussianState, marginals: &[GaussianLaw], v: &[usize]) -> Result<SubsetInfo> {
    if marginals.len() != joint.n {
        return Err(Error::DimensionMismatch { expected: joint.n, got: marginals.len() });
    }
    check_subset(v, joint.n)?;
    let p = marginal_subset(joint, v)?;
    let selected: Vec<GaussianLaw> = v.iter().map(|&i| marginals[i].clone()).collect();
    let q = GaussianLaw::product(&selected)?;
    Ok(SubsetInfo {
        entropy: relative_entropy_gaussian(&p, &q)?,
        fisher: relative_fisher_gaussian(&p, &q)?,
    })
}

/// Law of particle `k` given the particles in `v` sit at `x_v`.
pub fn conditional_gaussian(
    joint: &JointGaussianState,
    v: &[usize],
    k: usize,
    x_v: &[f64],
) -> Result<GaussianLaw> {
    check_subset(v, joint.n)?;
    if k >= joint.n {
        return Err(Error::IndexOutOfRange { index: k, len: joint.n });
    }
    if v.contains(&k) {
        return Err(Error::InvalidArgument(format!("index {k} is already conditioned on")));
    }
    let d = joint.d;
    let iv = coordinates(v, d);
    if x_v.len() != iv.len() {
        return Err(Error::DimensionMismatch { expected: iv.len(), got: x_v.len() });
    }
    let ik = coordinates(&[k], d);
    let cov = &joint.law.cov;
    let mean = &joint.law.mean;
    let s_vv = cov.select_rows(iv.iter()).select_columns(iv.iter());
    let s_kv = cov.select_rows(ik.iter()).select_columns(iv.iter());
    let s_kk = cov.select_rows(ik.iter()).select_columns(ik.iter());
    let chol = Cholesky::new(s_vv).ok_or(Error::NotPositiveDefinite)?;
    let diff = DVector::from_column_slice(x_v) - mean.select_rows(iv.iter());
    let cond_mean = mean.select_rows(ik.iter()) + &s_kv * chol.solve(&diff);
    let mut cond_cov = s_kk - &s_kv * chol.solve(&s_kv.transpose());
    symmetrize(&mut cond_cov);
    GaussianLaw::new(cond_mean, cond_cov)
}
