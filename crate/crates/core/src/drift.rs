//! Interaction kernels `b(x, y) = β(x − y)` with their gradients and bounds.
//!
//! All supported kernels are either affine (`β(r) = −a r`) or trigonometric
//! polynomials on a circle. In both cases the averaged drift `⟨b(x, ·), μ⟩`
//! depends on `μ` only through a short vector of moments, which is how the
//! projection simulator and the Fokker-Planck solver evaluate mean fields
//! without any density estimation or quadratic-cost convolution.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Domain {
    Torus { period: f64 },
    Euclidean { dim: usize },
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Torus { .. } => 1,
            Domain::Euclidean { dim } => *dim,
        }
    }

    pub fn period(&self) -> Option<f64> {
        match self {
            Domain::Torus { period } => Some(*period),
            Domain::Euclidean { .. } => None,
        }
    }

    /// Wraps a position into `[0, L)` on the torus; identity otherwise.
    #[inline]
    pub fn wrap(&self, x: f64) -> f64 {
        match self {
            Domain::Torus { period } => {
                let y = x.rem_euclid(*period);
                // rem_euclid can round up to exactly `period`
                if y >= *period {
                    0.0
                } else {
                    y
                }
            }
            Domain::Euclidean { .. } => x,
        }
    }

    /// Representative of a difference in `[−L/2, L/2)` on the torus.
    #[inline]
    pub fn wrap_difference(&self, r: f64) -> f64 {
        match self {
            Domain::Torus { period } => {
                let half = 0.5 * period;
                (r + half).rem_euclid(*period) - half
            }
            Domain::Euclidean { .. } => r,
        }
    }
}

/// One term `a cos(ω r) + b sin(ω r)` of a real trigonometric series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTerm {
    pub omega: f64,
    pub cos: f64,
    pub sin: f64,
}

/// `β(r) = c + Σ_k (a_k cos ω_k r + b_k sin ω_k r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigSeries {
    pub constant: f64,
    pub terms: Vec<TrigTerm>,
}

impl TrigSeries {
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        self.terms.iter().fold(self.constant, |acc, t| {
            let (s, c) = (t.omega * r).sin_cos();
            acc + t.cos * c + t.sin * s
        })
    }

    #[inline]
    pub fn derivative(&self, r: f64) -> f64 {
        self.terms.iter().fold(0.0, |acc, t| {
            let (s, c) = (t.omega * r).sin_cos();
            acc + t.omega * (t.sin * c - t.cos * s)
        })
    }

    /// Trigonometric interpolant of equispaced samples `β(kL/n)`.
    pub fn interpolate(samples: &[f64], period: f64) -> Self {
        let n = samples.len();
        let coeff = |j: usize| {
            samples.iter().enumerate().fold((0.0, 0.0), |(re, im), (k, &v)| {
                let angle = -TAU * (j * k) as f64 / n as f64;
                (re + v * angle.cos(), im + v * angle.sin())
            })
        };
        let constant = samples.iter().sum::<f64>() / n as f64;
        let scale = samples.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut terms = Vec::new();
        for j in 1..=n / 2 {
            let (re, im) = coeff(j);
            let weight = if 2 * j == n { 1.0 } else { 2.0 } / n as f64;
            let (a, b) = (weight * re, if 2 * j == n { 0.0 } else { -weight * im });
            if a.abs().max(b.abs()) > 1e-14 * scale {
                terms.push(TrigTerm {
                    omega: TAU * j as f64 / period,
                    cos: a,
                    sin: b,
                });
            }
        }
        Self { constant, terms }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    Zero,
    LinearDifference { rate: f64 },
    SineTorus { amplitude: f64, frequency: u32 },
    Tabulated { samples: Vec<f64>, series: TrigSeries },
}

/// Interaction kernel with its domain and boundedness metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftKernel {
    kind: KernelKind,
    domain: Domain,
}

/// Kernel description as it appears in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Zero {
        #[serde(default)]
        period: Option<f64>,
        #[serde(default = "default_dim")]
        dim: usize,
    },
    LinearDifference {
        rate: f64,
        #[serde(default = "default_dim")]
        dim: usize,
    },
    SineTorus {
        amplitude: f64,
        frequency: u32,
        #[serde(default = "default_period")]
        period: f64,
    },
    Tabulated {
        samples: Vec<f64>,
        #[serde(default = "default_period")]
        period: f64,
    },
}

fn default_dim() -> usize {
    1
}

fn default_period() -> f64 {
    1.0
}

impl KernelSpec {
    pub fn build(&self) -> Result<DriftKernel> {
        match self {
            KernelSpec::Zero { period: Some(p), .. } => DriftKernel::zero(Domain::Torus { period: *p }),
            KernelSpec::Zero { period: None, dim } => DriftKernel::zero(Domain::Euclidean { dim: *dim }),
            KernelSpec::LinearDifference { rate, dim } => DriftKernel::linear(*rate, *dim),
            KernelSpec::SineTorus { amplitude, frequency, period } => {
                DriftKernel::sine_torus(*amplitude, *frequency, *period)
            }
            KernelSpec::Tabulated { samples, period } => DriftKernel::tabulated(samples.clone(), *period),
        }
    }
}

fn check_domain(domain: Domain) -> Result<Domain> {
    match domain {
        Domain::Torus { period } if !(period > 0.0 && period.is_finite()) => {
            Err(Error::InvalidArgument(format!("torus period must be positive, got {period}")))
        }
        Domain::Euclidean { dim: 0 } => Err(Error::InvalidArgument("dimension must be positive".into())),
        d => Ok(d),
    }
}

impl DriftKernel {
    pub fn zero(domain: Domain) -> Result<Self> {
        Ok(Self {
            kind: KernelKind::Zero,
            domain: check_domain(domain)?,
        })
    }

    /// `β(r) = −a r` on `ℝ^d`: unbounded, but the only case with Gaussian laws.
    pub fn linear(rate: f64, dim: usize) -> Result<Self> {
        if !rate.is_finite() {
            return Err(Error::InvalidArgument("rate must be finite".into()));
        }
        Ok(Self {
            kind: KernelKind::LinearDifference { rate },
            domain: check_domain(Domain::Euclidean { dim })?,
        })
    }

    /// `β(r) = A sin(2πk r / L)` on the circle of length `L`.
    pub fn sine_torus(amplitude: f64, frequency: u32, period: f64) -> Result<Self> {
        if frequency == 0 || !amplitude.is_finite() {
            return Err(Error::InvalidArgument("sine kernel needs k ≥ 1 and finite amplitude".into()));
        }
        Ok(Self {
            kind: KernelKind::SineTorus { amplitude, frequency },
            domain: check_domain(Domain::Torus { period })?,
        })
    }

    /// Periodic kernel given by equispaced samples of `β` on `[0, L)`,
    /// evaluated through its trigonometric interpolant.
    pub fn tabulated(samples: Vec<f64>, period: f64) -> Result<Self> {
        if samples.len() < 2 || samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("tabulated kernel needs ≥ 2 finite samples".into()));
        }
        let domain = check_domain(Domain::Torus { period })?;
        let series = TrigSeries::interpolate(&samples, period);
        Ok(Self {
            kind: KernelKind::Tabulated { samples, series },
            domain,
        })
    }

    /// The kernel `c β` on the same domain.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        match &self.kind {
            KernelKind::Zero => Ok(self.clone()),
            KernelKind::LinearDifference { rate } => Self::linear(c * rate, self.dim()),
            KernelKind::SineTorus { amplitude, frequency } => Self::sine_torus(c * amplitude, *frequency, self.period()),
            KernelKind::Tabulated { samples, .. } => {
                Self::tabulated(samples.iter().map(|v| c * v).collect(), self.period())
            }
        }
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Every supported kernel is of the form `b(x, y) = β(x − y)`.
    pub fn difference_form(&self) -> bool {
        true
    }

    /// Whether `β = ∇V` for some potential `V`.
    pub fn gradient_form(&self) -> bool {
        match &self.kind {
            KernelKind::Tabulated { series, samples } => {
                let scale = samples.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                series.constant.abs() <= 1e-12 * scale.max(1.0)
            }
            _ => true,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, KernelKind::LinearDifference { .. })
    }

    /// `sup |b|`, `+∞` when unbounded.
    pub fn sup_b(&self) -> f64 {
        match &self.kind {
            KernelKind::Zero => 0.0,
            KernelKind::LinearDifference { rate } if *rate == 0.0 => 0.0,
            KernelKind::LinearDifference { .. } => f64::INFINITY,
            KernelKind::SineTorus { amplitude, .. } => amplitude.abs(),
            KernelKind::Tabulated { series, .. } => {
                series.constant.abs() + series.terms.iter().map(|t| t.cos.hypot(t.sin)).sum::<f64>()
            }
        }
    }

    /// `sup ‖∇b‖` (operator norm).
    pub fn sup_grad_b(&self) -> f64 {
        match &self.kind {
            KernelKind::Zero => 0.0,
            KernelKind::LinearDifference { rate } => rate.abs(),
            KernelKind::SineTorus { amplitude, frequency } => {
                amplitude.abs() * TAU * *frequency as f64 / self.period()
            }
            KernelKind::Tabulated { series, .. } => {
                series.terms.iter().map(|t| t.omega * t.cos.hypot(t.sin)).sum()
            }
        }
    }

    fn period(&self) -> f64 {
        self.domain.period().unwrap_or(f64::INFINITY)
    }

    /// The kernel as a trigonometric series in the wrapped difference, for torus kernels.
    pub fn trig_series(&self) -> Option<TrigSeries> {
        match &self.kind {
            KernelKind::SineTorus { amplitude, frequency } => Some(TrigSeries {
                constant: 0.0,
                terms: vec![TrigTerm {
                    omega: TAU * *frequency as f64 / self.period(),
                    cos: 0.0,
                    sin: *amplitude,
                }],
            }),
            KernelKind::Tabulated { series, .. } => Some(series.clone()),
            KernelKind::Zero if self.domain.period().is_some() => Some(TrigSeries {
                constant: 0.0,
                terms: Vec::new(),
            }),
            _ => None,
        }
    }

    /// Scalar `β(r)` for one-dimensional kernels; `r` is wrapped on the torus.
    #[inline]
    pub fn beta(&self, r: f64) -> f64 {
        let r = self.domain.wrap_difference(r);
        match &self.kind {
            KernelKind::Zero => 0.0,
            KernelKind::LinearDifference { rate } => -rate * r,
            KernelKind::SineTorus { amplitude, frequency } => {
                amplitude * (TAU * *frequency as f64 * r / self.period()).sin()
            }
            KernelKind::Tabulated { series, .. } => series.value(r),
        }
    }

    /// Scalar `β′(r)` for one-dimensional kernels.
    #[inline]
    pub fn beta_prime(&self, r: f64) -> f64 {
        let r = self.domain.wrap_difference(r);
        match &self.kind {
            KernelKind::Zero => 0.0,
            KernelKind::LinearDifference { rate } => -rate,
            KernelKind::SineTorus { amplitude, frequency } => {
                let w = TAU * *frequency as f64 / self.period();
                amplitude * w * (w * r).cos()
            }
            KernelKind::Tabulated { series, .. } => series.derivative(r),
        }
    }

    fn check_points(&self, x: &[f64], y: &[f64]) -> Result<()> {
        let d = self.dim();
        for len in [x.len(), y.len()] {
            if len != d {
                return Err(Error::DimensionMismatch { expected: d, got: len });
            }
        }
        Ok(())
    }

    /// Writes `b(x, y)` into `out` without dimension checks.
    #[inline]
    pub fn eval_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        match &self.kind {
            KernelKind::LinearDifference { rate } => {
                for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
                    *o = -rate * (a - b);
                }
            }
            _ => {
                for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
                    *o = self.beta(a - b);
                }
            }
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check_points(x, y)?;
        let mut out = vec![0.0; x.len()];
        self.eval_into(x, y, &mut out);
        Ok(out)
    }

    /// Jacobian of `b` in its first argument.
    pub fn eval_grad(&self, x: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
        self.check_points(x, y)?;
        let d = x.len();
        Ok(match &self.kind {
            KernelKind::LinearDifference { rate } => DMatrix::identity(d, d) * -rate,
            _ => DMatrix::from_fn(d, d, |i, j| if i == j { self.beta_prime(x[i] - y[i]) } else { 0.0 }),
        })
    }

    /// Length of the moment vector that determines `⟨b(x, ·), μ⟩`.
    pub fn moment_count(&self) -> usize {
        match &self.kind {
            KernelKind::Zero => 0,
            KernelKind::LinearDifference { .. } => 1 + self.dim(),
            _ => {
                let series = self.trig_series().expect("torus kernel");
                1 + 2 * series.terms.len()
            }
        }
    }

    /// Adds `weight ×` the moment contributions of the point `y` into `acc`.
    #[inline]
    pub fn accumulate_moments(&self, y: &[f64], weight: f64, acc: &mut [f64]) {
        match &self.kind {
            KernelKind::Zero => {}
            KernelKind::LinearDifference { .. } => {
                acc[0] += weight;
                for (a, v) in acc[1..].iter_mut().zip(y) {
                    *a += weight * v;
                }
            }
            KernelKind::SineTorus { frequency, .. } => {
                let (s, c) = (TAU * *frequency as f64 * y[0] / self.period()).sin_cos();
                acc[0] += weight;
                acc[1] += weight * c;
                acc[2] += weight * s;
            }
            KernelKind::Tabulated { series, .. } => {
                acc[0] += weight;
                for (k, t) in series.terms.iter().enumerate() {
                    let (s, c) = (t.omega * y[0]).sin_cos();
                    acc[1 + 2 * k] += weight * c;
                    acc[2 + 2 * k] += weight * s;
                }
            }
        }
    }

    /// `∫ b(x, y) μ(dy)` from the moments of `μ` (which need not be normalized).
    #[inline]
    pub fn field_from_moments(&self, moments: &[f64], x: &[f64], out: &mut [f64]) {
        match &self.kind {
            KernelKind::Zero => out.iter_mut().for_each(|o| *o = 0.0),
            KernelKind::LinearDifference { rate } => {
                let mass = moments[0];
                for ((o, xi), m) in out.iter_mut().zip(x).zip(&moments[1..]) {
                    *o = -rate * (mass * xi - m);
                }
            }
            KernelKind::SineTorus { amplitude, frequency } => {
                let (s, c) = (TAU * *frequency as f64 * x[0] / self.period()).sin_cos();
                // A sin(ω(x − y)) = A (sin ωx cos ωy − cos ωx sin ωy)
                out[0] = amplitude * (s * moments[1] - c * moments[2]);
            }
            KernelKind::Tabulated { series, .. } => {
                let mut v = series.constant * moments[0];
                for (k, t) in series.terms.iter().enumerate() {
                    let (s, c) = (t.omega * x[0]).sin_cos();
                    let (cy, sy) = (moments[1 + 2 * k], moments[2 + 2 * k]);
                    v += c * (t.cos * cy - t.sin * sy) + s * (t.cos * sy + t.sin * cy);
                }
                out[0] = v;
            }
        }
    }
}
