//! Experiment configuration: a flat JSON document describing one
//! benchmark, a solver grid (scheme x subspace dimension x step policy),
//! and the replication protocol. All paths are resolved relative to the
//! config file.

use crate::{CliError, CliResult};
use serde::Deserialize;
use ssd_core::{
    nesterov_worst, quadratic, rankdef_least_squares, theory_fixed_step, Benchmark,
    DerivativeBackend, SamplerScheme, StepPolicy,
};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BenchmarkSpec {
    NesterovWorst { dim: usize, r: usize, lambda: f64 },
    Quadratic { dim: usize, gamma: f64, lambda: f64 },
    RankdefLeastSquares { rows: usize, dim: usize, rank: usize },
}

impl BenchmarkSpec {
    pub fn build(&self) -> CliResult<Benchmark> {
        let built = match *self {
            BenchmarkSpec::NesterovWorst { dim, r, lambda } => nesterov_worst(dim, r, lambda),
            BenchmarkSpec::Quadratic { dim, gamma, lambda } => quadratic(dim, gamma, lambda),
            BenchmarkSpec::RankdefLeastSquares { rows, dim, rank } => {
                rankdef_least_squares(rows, dim, rank)
            }
        };
        // Bad benchmark parameters are configuration mismatches, not
        // parse failures.
        built.map_err(CliError::mismatch)
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BackendSpec {
    Analytic,
    #[default]
    DualAd,
    FiniteDifference {
        h: Option<f64>,
    },
}

impl BackendSpec {
    pub fn to_backend(self) -> DerivativeBackend {
        match self {
            BackendSpec::Analytic => DerivativeBackend::Analytic,
            BackendSpec::DualAd => DerivativeBackend::DualAd,
            BackendSpec::FiniteDifference { h } => match h {
                Some(h) => DerivativeBackend::FiniteDifference { h },
                None => DerivativeBackend::finite_difference(),
            },
        }
    }

    pub fn label(self) -> String {
        match self {
            BackendSpec::Analytic => "analytic".into(),
            BackendSpec::DualAd => "dual-ad".into(),
            BackendSpec::FiniteDifference { .. } => "finite-difference".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StepSpec {
    /// Fixed step; omitted `alpha` resolves to `l/(d·lambda)` for the
    /// subspace solvers and `1/lambda` for gradient descent.
    Fixed { alpha: Option<f64> },
    /// Armijo backtracking; omitted fields take the defaults
    /// `alpha0 = 1`, `shrink = 0.5`, `slope = 1e-4`, `max_backtracks = 50`.
    Armijo {
        alpha0: Option<f64>,
        shrink: Option<f64>,
        slope: Option<f64>,
        max_backtracks: Option<u32>,
    },
}

impl StepSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            StepSpec::Fixed { .. } => "fixed",
            StepSpec::Armijo { .. } => "armijo",
        }
    }

    /// Resolves to a concrete policy. `ell = None` marks the
    /// full-gradient baseline.
    pub fn resolve(
        &self,
        ell: Option<usize>,
        dim: usize,
        lambda: Option<f64>,
    ) -> CliResult<StepPolicy> {
        Ok(match *self {
            StepSpec::Fixed { alpha: Some(a) } => StepPolicy::Fixed { alpha: a },
            StepSpec::Fixed { alpha: None } => {
                let lambda = lambda.ok_or_else(|| {
                    CliError::Mismatch(
                        "a default fixed step needs a benchmark with a known gradient Lipschitz constant"
                            .into(),
                    )
                })?;
                let alpha = match ell {
                    Some(ell) => theory_fixed_step(ell, dim, lambda),
                    None => 1.0 / lambda,
                };
                StepPolicy::Fixed { alpha }
            }
            StepSpec::Armijo {
                alpha0,
                shrink,
                slope,
                max_backtracks,
            } => StepPolicy::Armijo {
                alpha0: alpha0.unwrap_or(1.0),
                shrink: shrink.unwrap_or(0.5),
                slope: slope.unwrap_or(1e-4),
                max_backtracks: max_backtracks.unwrap_or(50),
            },
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum X0Spec {
    Named(String),
    Explicit(Vec<f64>),
    Gaussian { gaussian: f64 },
}

impl Default for X0Spec {
    fn default() -> Self {
        X0Spec::Named("zeros".into())
    }
}

fn default_threshold() -> f64 {
    0.95
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub benchmark: BenchmarkSpec,
    #[serde(default)]
    pub backend: BackendSpec,
    #[serde(default)]
    pub schemes: Vec<SamplerScheme>,
    #[serde(default)]
    pub ells: Vec<usize>,
    #[serde(default)]
    pub step_policies: Vec<StepSpec>,
    #[serde(default)]
    pub include_gradient_descent: bool,
    pub replicates: usize,
    pub base_seed: u64,
    pub max_iterations: usize,
    pub max_fevals: u64,
    #[serde(default)]
    pub target_f: Option<f64>,
    #[serde(default)]
    pub target_relative_error: Option<f64>,
    #[serde(default)]
    pub x0: X0Spec,
    pub output_dir: PathBuf,
    #[serde(default = "default_threshold")]
    pub profile_threshold: f64,
}

/// One solver in the grid.
#[derive(Debug, Clone)]
pub struct SolverSpec {
    pub id: String,
    /// `None` marks the full-gradient baseline.
    pub scheme: Option<SamplerScheme>,
    pub ell: usize,
    pub policy_kind: &'static str,
    pub step: StepPolicy,
}

/// A fully validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub config: ExperimentConfig,
    pub benchmark: Benchmark,
    pub backend: DerivativeBackend,
    pub solvers: Vec<SolverSpec>,
    pub output_dir: PathBuf,
}

pub fn load_config(path: &Path) -> CliResult<ExperimentPlan> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let config: ExperimentConfig = serde_json::from_str(&raw)?;
    plan_from_config(config, path.parent().unwrap_or_else(|| Path::new(".")))
}

pub fn plan_from_config(config: ExperimentConfig, base_dir: &Path) -> CliResult<ExperimentPlan> {
    let benchmark = config.benchmark.build()?;
    let dim = benchmark.dim();

    if config.replicates == 0 {
        return Err(CliError::Mismatch("replicates must be at least 1".into()));
    }
    if config.max_iterations == 0 || config.max_fevals == 0 {
        return Err(CliError::Mismatch("budgets must be positive".into()));
    }
    if !(0.0 < config.profile_threshold && config.profile_threshold < 1.0) {
        return Err(CliError::Mismatch(format!(
            "profile threshold must lie in (0, 1), got {}",
            config.profile_threshold
        )));
    }
    if config.target_relative_error.is_some() && benchmark.f_star().is_none() {
        return Err(CliError::Mismatch(
            "a relative-error target requires a benchmark with a known minimum".into(),
        ));
    }
    for &ell in &config.ells {
        if ell < 1 || ell > dim {
            return Err(CliError::Mismatch(format!(
                "subspace dimension {ell} is outside 1..={dim}"
            )));
        }
    }
    if let X0Spec::Explicit(v) = &config.x0 {
        if v.len() != dim {
            return Err(CliError::Mismatch(format!(
                "x0 has length {}, benchmark dimension is {dim}",
                v.len()
            )));
        }
    }
    if let X0Spec::Named(name) = &config.x0 {
        if name != "zeros" && name != "ones" {
            return Err(CliError::Input(format!(
                "unknown x0 `{name}`; use \"zeros\", \"ones\", an array, or {{\"gaussian\": scale}}"
            )));
        }
    }

    let policy_label = |idx: usize, spec: &StepSpec| -> String {
        if config.step_policies.len() == 1 {
            spec.kind().to_string()
        } else {
            format!("{}{idx}", spec.kind())
        }
    };

    let mut solvers = Vec::new();
    for scheme in &config.schemes {
        for &ell in &config.ells {
            for (idx, spec) in config.step_policies.iter().enumerate() {
                let step = spec.resolve(Some(ell), dim, benchmark.lambda())?;
                solvers.push(SolverSpec {
                    id: format!("ssd-{scheme}-l{ell}-{}", policy_label(idx, spec)),
                    scheme: Some(*scheme),
                    ell,
                    policy_kind: spec.kind(),
                    step,
                });
            }
        }
    }
    if config.include_gradient_descent {
        for (idx, spec) in config.step_policies.iter().enumerate() {
            let step = spec.resolve(None, dim, benchmark.lambda())?;
            solvers.push(SolverSpec {
                id: format!("gd-{}", policy_label(idx, spec)),
                scheme: None,
                ell: dim,
                policy_kind: spec.kind(),
                step,
            });
        }
    }
    if solvers.is_empty() {
        return Err(CliError::Mismatch(
            "empty solver grid: no schemes x ells x step policies and no gradient-descent baseline"
                .into(),
        ));
    }

    let output_dir = if config.output_dir.is_absolute() {
        config.output_dir.clone()
    } else {
        base_dir.join(&config.output_dir)
    };

    Ok(ExperimentPlan {
        backend: config.backend.to_backend(),
        benchmark,
        solvers,
        output_dir,
        config,
    })
}
