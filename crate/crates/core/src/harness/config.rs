//! Experiment configuration files.
//!
//! A config is a JSON object; see `configs/` for one file per experiment kind.
//! Every science parameter lives here. The only environment input is
//! `RAYON_NUM_THREADS`, which sets the worker count and never the results.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::density::{FpOptions, TorusGrid1D};
use crate::drift::{DriftKernel, KernelSpec};
use crate::error::{Error, Result};
use crate::graphon::{Graphon, StepKernel};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// `H + I` of `k`-particle marginals against the projection, as `N` grows.
    IndependenceScaling,
    /// `sup_u H_T^u` between two graphon mean-field systems as the graphon moves.
    EntropyStability,
    /// `sup_u (H_T^u + I_T^u)` for the same sweep.
    FisherStability,
    /// Agreement between closed forms, quadrature, PDE, KDE and simulation.
    EstimatorValidation,
    /// Positivity and growth of the graphon operator exponential, and the hierarchy table.
    OperatorChecks,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::IndependenceScaling => "independence_scaling",
            ExperimentKind::EntropyStability => "entropy_stability",
            ExperimentKind::FisherStability => "fisher_stability",
            ExperimentKind::EstimatorValidation => "estimator_validation",
            ExperimentKind::OperatorChecks => "operator_checks",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Linear kernel and Gaussian laws, evaluated in closed form.
    Oracle,
    /// Bounded periodic kernel, laws from the Fokker-Planck solver.
    Torus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GraphonSpec {
    Constant { value: f64 },
    Step { values: Vec<Vec<f64>> },
    Random { blocks: usize, seed: u64 },
    File { path: PathBuf },
}

impl GraphonSpec {
    pub fn build(&self, base_dir: &Path) -> Result<Graphon> {
        match self {
            GraphonSpec::Constant { value } => Graphon::constant(*value),
            GraphonSpec::Step { values } => Graphon::new(values.clone()),
            GraphonSpec::Random { blocks, seed } => Graphon::random(*blocks, *seed),
            GraphonSpec::File { path } => Graphon::load(base_dir.join(path)),
        }
    }
}

/// Initial law per particle or block; index `i` uses `means[i % means.len()]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialSpec {
    Gaussian { means: Vec<f64>, variance: f64 },
    VonMises { means: Vec<f64>, kappa: f64 },
}

impl InitialSpec {
    pub fn mean(&self, i: usize) -> f64 {
        let means = match self {
            InitialSpec::Gaussian { means, .. } | InitialSpec::VonMises { means, .. } => means,
        };
        means[i % means.len()]
    }
}

/// Pass/fail thresholds checked after a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gates {
    /// Allowed interval for every fitted log-log slope.
    #[serde(default)]
    pub slope_range: Option<[f64; 2]>,
    #[serde(default = "default_r_squared")]
    pub min_r_squared: f64,
    /// Largest allowed max/min of `(H + I) / (k²/N²)` over the grid.
    #[serde(default)]
    pub max_ratio_spread: Option<f64>,
    /// Largest allowed relative change when the PDE grid is doubled.
    #[serde(default)]
    pub refinement_tolerance: Option<f64>,
}

fn default_r_squared() -> f64 {
    0.98
}

impl Default for Gates {
    fn default() -> Self {
        Self { slope_range: None, min_r_squared: default_r_squared(), max_ratio_spread: None, refinement_tolerance: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub kind: ExperimentKind,
    #[serde(default)]
    pub label: String,
    #[serde(default = "default_regime")]
    pub regime: Regime,
    pub graphon: GraphonSpec,
    /// Signed step kernel `Δ`; the perturbed graphon is `clamp(G + εΔ)`.
    #[serde(default)]
    pub perturbation: Option<Vec<Vec<f64>>>,
    pub kernel: KernelSpec,
    #[serde(default)]
    pub initial: Option<InitialSpec>,
    #[serde(default)]
    pub n_values: Vec<usize>,
    #[serde(default)]
    pub subset_sizes: Vec<usize>,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    pub t_final: f64,
    /// Step of the ODE solvers (default 1e-2) and particle simulations
    /// (default 1e-3). Explicit PDE runs use the largest provably stable step
    /// not above this; implicit ones use it as given (default 1e-3).
    #[serde(default)]
    pub dt: Option<f64>,
    /// Step sizes for the weak-order rows of the estimator validation.
    #[serde(default)]
    pub dt_values: Vec<f64>,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default = "default_cells")]
    pub grid_cells: usize,
    #[serde(default)]
    pub pde: FpOptions,
    /// Random instances for the operator checks.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Output prefix; `.csv` and `.jsonl` are appended.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub gates: Gates,
    /// Directory that relative paths resolve against; set when loading from a file.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_regime() -> Regime {
    Regime::Oracle
}

fn default_replicas() -> usize {
    10_000
}

fn default_cells() -> usize {
    1024
}

fn default_samples() -> usize {
    100
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_json_str(&std::fs::read_to_string(path)?)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn graphon(&self) -> Result<Graphon> {
        self.graphon.build(&self.base_dir)
    }

    pub fn perturbation_kernel(&self) -> Result<StepKernel> {
        let rows = self.perturbation.clone().ok_or_else(|| config_error("stability runs need a perturbation"))?;
        StepKernel::new(rows)
    }

    pub fn drift_kernel(&self) -> Result<DriftKernel> {
        self.kernel.build()
    }

    pub fn output_prefix(&self) -> Option<PathBuf> {
        self.output.as_ref().map(|p| self.base_dir.join(p))
    }

    /// Checks everything that can be checked without running the experiment.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(config_error(format!(
                "schema version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(config_error("t_final must be positive"));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt <= self.t_final) {
                return Err(config_error("dt must lie in (0, t_final]"));
            }
        }
        if self.gates.min_r_squared > 1.0 {
            return Err(config_error("min_r_squared cannot exceed 1"));
        }
        if let Some([lo, hi]) = self.gates.slope_range {
            if !(lo <= hi) {
                return Err(config_error("slope_range must be [low, high]"));
            }
        }
        let graphon = self.graphon()?;
        let kernel = self.drift_kernel()?;
        self.validate_regime(&kernel)?;
        match self.kind {
            ExperimentKind::IndependenceScaling => {
                nonempty(&self.n_values, "n_values")?;
                nonempty(&self.subset_sizes, "subset_sizes")?;
                if self.n_values.contains(&0) || self.subset_sizes.contains(&0) {
                    return Err(config_error("n_values and subset_sizes must be positive"));
                }
                let n_min = *self.n_values.iter().min().unwrap();
                if self.subset_sizes.iter().any(|&k| k > n_min) {
                    return Err(config_error("every subset size must be at most the smallest N"));
                }
                if self.regime == Regime::Torus {
                    if self.subset_sizes != [1] {
                        return Err(config_error("the torus scaling regime supports subset_sizes = [1] only"));
                    }
                    self.check_replicas()?;
                    self.grid()?;
                }
            }
            ExperimentKind::EntropyStability | ExperimentKind::FisherStability => {
                nonempty(&self.epsilons, "epsilons")?;
                if self.epsilons.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
                    return Err(config_error("epsilons must be positive"));
                }
                let delta = self.perturbation_kernel()?;
                graphon.perturbed(&delta, 0.0)?;
                if self.regime == Regime::Torus {
                    self.grid()?;
                }
            }
            ExperimentKind::EstimatorValidation => {
                if kernel.domain().period().is_none() {
                    return Err(config_error("estimator validation needs a torus kernel for the PDE rows"));
                }
                self.check_replicas()?;
                self.grid()?;
                if self.dt_values.iter().any(|&h| !(h > 0.0 && h <= self.t_final)) {
                    return Err(config_error("dt_values must lie in (0, t_final]"));
                }
            }
            ExperimentKind::OperatorChecks => {
                if self.samples == 0 {
                    return Err(config_error("samples must be positive"));
                }
                if self.n_values.iter().any(|&n| n == 0 || n > crate::hierarchy::MAX_DENSE_PARTICLES) {
                    return Err(config_error("hierarchy sizes must lie in 1..=20"));
                }
            }
        }
        Ok(())
    }

    fn validate_regime(&self, kernel: &DriftKernel) -> Result<()> {
        let needs_regime = matches!(
            self.kind,
            ExperimentKind::IndependenceScaling | ExperimentKind::EntropyStability | ExperimentKind::FisherStability
        );
        if !needs_regime {
            return Ok(());
        }
        let initial = self.initial.as_ref().ok_or_else(|| config_error("this experiment needs an initial law"))?;
        match (self.regime, initial) {
            (Regime::Oracle, InitialSpec::Gaussian { means, variance }) => {
                if !kernel.is_linear() || kernel.dim() != 1 {
                    return Err(config_error("the oracle regime needs a one-dimensional linear_difference kernel"));
                }
                // Gaussian initial data: finite moments of every order and a smooth positive density
                if means.is_empty() || !(*variance > 0.0) || means.iter().any(|m| !m.is_finite()) {
                    return Err(config_error("Gaussian initial laws need finite means and positive variance"));
                }
            }
            (Regime::Torus, InitialSpec::VonMises { means, kappa }) => {
                if kernel.domain().period().is_none() {
                    return Err(config_error("the torus regime needs a periodic kernel"));
                }
                if means.is_empty() || !(*kappa >= 0.0) {
                    return Err(config_error("von Mises initial laws need means and κ ≥ 0"));
                }
            }
            _ => return Err(config_error("oracle runs use Gaussian initial laws, torus runs von Mises ones")),
        }
        Ok(())
    }

    fn check_replicas(&self) -> Result<()> {
        if self.replicas < crate::simulate::MIN_MEAN_FIELD_REPLICAS {
            return Err(config_error(format!(
                "replicas must be at least {}",
                crate::simulate::MIN_MEAN_FIELD_REPLICAS
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TorusGrid1D> {
        let period = self
            .drift_kernel()?
            .domain()
            .period()
            .ok_or_else(|| config_error("grid runs need a periodic kernel"))?;
        TorusGrid1D::new(self.grid_cells, period)
    }
}

fn nonempty<T>(v: &[T], name: &str) -> Result<()> {
    if v.is_empty() {
        Err(config_error(format!("{name} must not be empty")))
    } else {
        Ok(())
    }
}
