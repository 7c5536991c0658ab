//! The stochastic subspace descent recursion and a full-gradient baseline.
//!
//! Each iteration draws a direction matrix `P`, forms the projected
//! gradient `g = P Pᵀ ∇f(x)` from `l` directional derivatives, and steps
//! `x <- x - alpha g` under either a fixed step or Armijo backtracking.
//! Runs are strictly sequential; parallelism belongs to the experiment
//! layer, one oracle and one RNG stream per run.

use crate::error::{Result, SsdError};
use crate::linalg::DenseVector;
use crate::oracle::ObjectiveOracle;
use crate::rng::RngStream;
use crate::sampler::{sample, DirectionMatrix, SamplerScheme};
use serde::{Deserialize, Serialize};

/// Step-size policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum StepPolicy {
    /// Constant step.
    Fixed { alpha: f64 },
    /// Backtracking linesearch accepting the largest `alpha0·shrink^m`
    /// with `f(x - alpha g) <= f(x) - slope·alpha·||g||²`. Every trial
    /// evaluation is charged.
    Armijo {
        alpha0: f64,
        shrink: f64,
        slope: f64,
        max_backtracks: u32,
    },
}

impl StepPolicy {
    /// Armijo with the conventional constants: `alpha0 = 1`,
    /// `shrink = 0.5`, `slope = 1e-4`, 50 trials.
    pub fn default_armijo() -> Self {
        StepPolicy::Armijo {
            alpha0: 1.0,
            shrink: 0.5,
            slope: 1e-4,
            max_backtracks: 50,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            StepPolicy::Fixed { alpha } => {
                if !(alpha > 0.0) || !alpha.is_finite() {
                    return Err(SsdError::InvalidConfig(format!(
                        "fixed step must be positive and finite, got {alpha}"
                    )));
                }
            }
            StepPolicy::Armijo {
                alpha0,
                shrink,
                slope,
                max_backtracks,
            } => {
                if !(alpha0 > 0.0) || !alpha0.is_finite() {
                    return Err(SsdError::InvalidConfig(format!(
                        "initial step must be positive, got {alpha0}"
                    )));
                }
                if !(0.0 < shrink && shrink < 1.0) {
                    return Err(SsdError::InvalidConfig(format!(
                        "shrink factor must lie in (0, 1), got {shrink}"
                    )));
                }
                if !(0.0 < slope && slope < 1.0) {
                    return Err(SsdError::InvalidConfig(format!(
                        "sufficient-decrease slope must lie in (0, 1), got {slope}"
                    )));
                }
                if max_backtracks == 0 {
                    return Err(SsdError::InvalidConfig(
                        "linesearch needs at least one trial".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    FevalBudget,
    IterationBudget,
    LinesearchFailure,
}

/// Configuration of one optimization run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Subspace dimension (ignored by the full-gradient baseline).
    pub ell: usize,
    pub scheme: SamplerScheme,
    pub step: StepPolicy,
    pub max_iterations: usize,
    /// Budget on charged evaluations, checked at iteration boundaries;
    /// the final iteration may overshoot by its own cost.
    pub max_fevals: u64,
    /// Stop once `f(x) <= target_f`.
    pub target_f: Option<f64>,
    /// Stop once the relative error against the objective's known minimum
    /// falls to this level; requires that minimum to be known.
    pub target_relative_error: Option<f64>,
    pub seed: u64,
    pub stream_id: u64,
    /// When set and an analytic gradient exists, each record carries
    /// whether the draw embedded the gradient successfully at this
    /// distortion. Diagnostic only: not charged to the evaluation count.
    pub track_embedding_eps: Option<f64>,
}

impl OptimizerConfig {
    pub fn new(ell: usize, scheme: SamplerScheme, step: StepPolicy) -> Self {
        Self {
            ell,
            scheme,
            step,
            max_iterations: 1000,
            max_fevals: u64::MAX,
            target_f: None,
            target_relative_error: None,
            seed: 0,
            stream_id: 0,
            track_embedding_eps: None,
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.ell < 1 || self.ell > dim {
            return Err(SsdError::InvalidConfig(format!(
                "subspace dimension must satisfy 1 <= l <= d, got l={}, d={dim}",
                self.ell
            )));
        }
        self.step.validate()?;
        if let Some(eps) = self.track_embedding_eps {
            if !(0.0 < eps && eps < 1.0) {
                return Err(SsdError::InvalidConfig(format!(
                    "embedding distortion must lie in (0, 1), got {eps}"
                )));
            }
        }
        Ok(())
    }
}

/// Theory-suggested ceiling for a fixed step, `2l/(d·lambda)`. A fixed
/// step at or above this admits non-monotone runs; callers may warn.
pub fn fixed_step_limit(ell: usize, dim: usize, lambda: f64) -> f64 {
    2.0 * ell as f64 / (dim as f64 * lambda)
}

/// The fixed step the linear-rate analysis prescribes, `l/(d·lambda)`.
pub fn theory_fixed_step(ell: usize, dim: usize, lambda: f64) -> f64 {
    ell as f64 / (dim as f64 * lambda)
}

/// Relative error against a known minimum, `(f - f*)/|f*|`; degenerates to
/// the absolute error when `f* = 0`.
pub fn relative_error(f: f64, f_star: f64) -> f64 {
    if f_star == 0.0 {
        f
    } else {
        (f - f_star) / f_star.abs()
    }
}

/// One trace row. `fevals` is the cumulative charge at the moment this
/// point's value became known, so the pair (`fevals`, `f_value`) is a
/// point on the cost-versus-error curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub fevals: u64,
    pub f_value: f64,
    /// Step taken from this point; 0 on terminal rows.
    pub step_size: f64,
    pub embedding_success: Option<bool>,
}

/// A completed run.
#[derive(Debug, Clone)]
pub struct OptimizerTrace {
    pub records: Vec<TraceRecord>,
    pub status: Termination,
    pub final_x: DenseVector,
}

impl OptimizerTrace {
    /// Charged evaluations needed to first observe `f <= target`, if the
    /// run ever did.
    pub fn fevals_to_target(&self, target: f64) -> Option<u64> {
        self.records
            .iter()
            .find(|r| r.f_value <= target)
            .map(|r| r.fevals)
    }

    pub fn last_f(&self) -> Option<f64> {
        self.records.last().map(|r| r.f_value)
    }
}

/// One subspace step `x - alpha·P Pᵀ ∇f(x)`, built from `l` directional
/// derivatives (the gradient itself is never materialized unless the
/// oracle backend is analytic).
pub fn ssd_step(
    x: &DenseVector,
    oracle: &ObjectiveOracle,
    p: &DirectionMatrix,
    alpha: f64,
) -> Result<DenseVector> {
    assert!(alpha > 0.0, "step size must be positive");
    let g_sub = oracle.subspace_gradient(x, p)?;
    let g = p.apply(&g_sub);
    let mut next = x.clone();
    next.axpy(-alpha, &g);
    Ok(next)
}

enum DirectionMode {
    Subspace,
    FullGradient,
}

/// Runs stochastic subspace descent.
pub fn run(
    config: &OptimizerConfig,
    oracle: &ObjectiveOracle,
    x0: &DenseVector,
) -> Result<OptimizerTrace> {
    run_loop(config, oracle, x0, DirectionMode::Subspace)
}

/// Full-gradient descent under the same trace and cost conventions; each
/// iteration's gradient is charged `d + 1` evaluations.
pub fn gradient_descent(
    config: &OptimizerConfig,
    oracle: &ObjectiveOracle,
    x0: &DenseVector,
) -> Result<OptimizerTrace> {
    run_loop(config, oracle, x0, DirectionMode::FullGradient)
}

fn run_loop(
    config: &OptimizerConfig,
    oracle: &ObjectiveOracle,
    x0: &DenseVector,
    mode: DirectionMode,
) -> Result<OptimizerTrace> {
    let dim = oracle.dim();
    assert_eq!(x0.dim(), dim, "starting point has wrong dimension");
    config.validate(dim)?;
    if !x0.all_finite() {
        return Err(SsdError::Domain("starting point is not finite".into()));
    }

    let target = resolve_target(config, oracle)?;
    let mut rng = RngStream::new(config.seed, config.stream_id);
    let mut x = x0.clone();
    let mut records: Vec<TraceRecord> = Vec::new();
    let mut iteration = 0usize;

    let status = loop {
        if iteration >= config.max_iterations {
            break Termination::IterationBudget;
        }
        if oracle.fevals() >= config.max_fevals {
            break Termination::FevalBudget;
        }

        // Direction for this iteration, along with f at the current point.
        let (f_here, g, flag) = match mode {
            DirectionMode::Subspace => {
                let p = sample(config.scheme, &mut rng, dim, config.ell);
                let (f_here, g_sub) = oracle.value_and_subspace_gradient(&x, &p)?;
                let flag = embedding_flag(config, oracle, &x, &p);
                (f_here, p.apply(&g_sub), flag)
            }
            DirectionMode::FullGradient => {
                let (f_here, g) = oracle.value_and_full_gradient(&x)?;
                (f_here, g, None)
            }
        };
        let fevals_known = oracle.fevals();

        if let Some(t) = target {
            if f_here <= t {
                records.push(TraceRecord {
                    iteration,
                    fevals: fevals_known,
                    f_value: f_here,
                    step_size: 0.0,
                    embedding_success: flag,
                });
                break Termination::Converged;
            }
        }

        match config.step {
            StepPolicy::Fixed { alpha } => {
                x.axpy(-alpha, &g);
                records.push(TraceRecord {
                    iteration,
                    fevals: fevals_known,
                    f_value: f_here,
                    step_size: alpha,
                    embedding_success: flag,
                });
            }
            StepPolicy::Armijo {
                alpha0,
                shrink,
                slope,
                max_backtracks,
            } => {
                let gnorm2 = g.dot(&g);
                let mut alpha = alpha0;
                let mut accepted: Option<(DenseVector, f64, f64)> = None;
                for _ in 0..max_backtracks {
                    let mut trial = x.clone();
                    trial.axpy(-alpha, &g);
                    let f_trial = oracle.value(&trial)?;
                    if f_trial <= f_here - slope * alpha * gnorm2 {
                        accepted = Some((trial, f_trial, alpha));
                        break;
                    }
                    alpha *= shrink;
                }
                let Some((trial, f_trial, alpha)) = accepted else {
                    records.push(TraceRecord {
                        iteration,
                        fevals: fevals_known,
                        f_value: f_here,
                        step_size: 0.0,
                        embedding_success: flag,
                    });
                    break Termination::LinesearchFailure;
                };
                records.push(TraceRecord {
                    iteration,
                    fevals: fevals_known,
                    f_value: f_here,
                    step_size: alpha,
                    embedding_success: flag,
                });
                x = trial;
                // The accepted trial already revealed f at the new point;
                // stop right here if it meets the target.
                if let Some(t) = target {
                    if f_trial <= t {
                        records.push(TraceRecord {
                            iteration: iteration + 1,
                            fevals: oracle.fevals(),
                            f_value: f_trial,
                            step_size: 0.0,
                            embedding_success: None,
                        });
                        break Termination::Converged;
                    }
                }
            }
        }
        iteration += 1;
    };

    Ok(OptimizerTrace {
        records,
        status,
        final_x: x,
    })
}

fn resolve_target(config: &OptimizerConfig, oracle: &ObjectiveOracle) -> Result<Option<f64>> {
    let mut target = config.target_f;
    if let Some(rel) = config.target_relative_error {
        let f_star = oracle.objective().minimum().ok_or_else(|| {
            SsdError::InvalidConfig(
                "a relative-error target requires an objective with a known minimum".into(),
            )
        })?;
        let abs = if f_star == 0.0 {
            rel
        } else {
            f_star + rel * f_star.abs()
        };
        target = Some(match target {
            Some(t) => t.min(abs),
            None => abs,
        });
    }
    Ok(target)
}

/// Diagnostic embedding flag; reads the analytic gradient directly so it
/// never perturbs the charged evaluation count.
fn embedding_flag(
    config: &OptimizerConfig,
    oracle: &ObjectiveOracle,
    x: &DenseVector,
    p: &DirectionMatrix,
) -> Option<bool> {
    let eps = config.track_embedding_eps?;
    let mut grad = DenseVector::zeros(x.dim());
    if !oracle.objective().gradient(x.as_slice(), grad.as_mut_slice()) {
        return None;
    }
    let gnorm2 = grad.dot(&grad);
    if gnorm2 == 0.0 {
        return None;
    }
    let image = p.transpose_apply(&grad);
    Some(image.dot(&image) >= (1.0 - eps) * gnorm2)
}
