//! Objective oracles with interchangeable derivative backends.
//!
//! An [`ObjectiveOracle`] exposes values and directional derivatives of an
//! objective and keeps the evaluation count that experiment figures use as
//! their cost axis. Three backends are interchangeable behind one contract:
//!
//! * `analytic` — a closed-form gradient. Anything touching the full
//!   gradient is charged `d + 1` evaluations (the value plus `d`
//!   directional derivatives), so comparisons against subspace methods are
//!   priced the way a derivative-free user would pay for them.
//! * `dual-ad` — forward-mode AD; one evaluation per direction.
//! * `finite-difference` — forward differences sharing one base point;
//!   `l + 1` evaluations for an `l`-dimensional subspace.

use crate::dual::Dual;
use crate::error::{Result, SsdError};
use crate::linalg::DenseVector;
use crate::sampler::DirectionMatrix;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// An objective with a value channel, a dual (tangent) channel, and an
/// optional analytic gradient plus curvature metadata.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> &str {
        "objective"
    }

    fn eval(&self, x: &[f64]) -> f64;

    fn eval_dual(&self, x: &[Dual]) -> Dual;

    /// Writes `∇f(x)` into `out` and returns `true`, or returns `false`
    /// when no analytic gradient exists.
    fn gradient(&self, _x: &[f64], _out: &mut [f64]) -> bool {
        false
    }

    /// Known minimum value, when available.
    fn minimum(&self) -> Option<f64> {
        None
    }

    /// A known minimizer, when the minimum is attained at a point worth
    /// reporting (may be one element of a larger solution set).
    fn minimizer(&self) -> Option<DenseVector> {
        None
    }

    /// Gradient Lipschitz constant, when known.
    fn lipschitz(&self) -> Option<f64> {
        None
    }

    /// Strong-convexity (or PL) constant, when known.
    fn strong_convexity(&self) -> Option<f64> {
        None
    }
}

/// How derivatives are produced and priced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeBackend {
    Analytic,
    DualAd,
    /// Forward differences with step `h · max(1, ||x||)`.
    FiniteDifference { h: f64 },
}

impl DerivativeBackend {
    /// Finite differences with the default base step `1e-6`.
    pub fn finite_difference() -> Self {
        DerivativeBackend::FiniteDifference { h: 1e-6 }
    }
}

/// An objective paired with a derivative backend and an evaluation counter.
///
/// The counter is atomic so a finished oracle can be read from anywhere,
/// but the supported pattern is one oracle per optimization run.
pub struct ObjectiveOracle {
    objective: Arc<dyn Objective>,
    backend: DerivativeBackend,
    fevals: AtomicU64,
}

impl ObjectiveOracle {
    pub fn new<O: Objective + 'static>(objective: O, backend: DerivativeBackend) -> Self {
        Self::from_arc(Arc::new(objective), backend)
    }

    pub fn from_arc(objective: Arc<dyn Objective>, backend: DerivativeBackend) -> Self {
        Self {
            objective,
            backend,
            fevals: AtomicU64::new(0),
        }
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn backend(&self) -> DerivativeBackend {
        self.backend
    }

    pub fn objective(&self) -> &dyn Objective {
        self.objective.as_ref()
    }

    pub fn objective_arc(&self) -> Arc<dyn Objective> {
        Arc::clone(&self.objective)
    }

    /// Cumulative charged function evaluations.
    pub fn fevals(&self) -> u64 {
        self.fevals.load(Ordering::Relaxed)
    }

    pub fn reset_fevals(&self) {
        self.fevals.store(0, Ordering::Relaxed);
    }

    fn charge(&self, n: u64) {
        self.fevals.fetch_add(n, Ordering::Relaxed);
    }

    fn check_dim(&self, x: &DenseVector) {
        assert_eq!(
            x.dim(),
            self.dim(),
            "oracle expects dimension {}, got {}",
            self.dim(),
            x.dim()
        );
    }

    fn finite(&self, v: f64) -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(SsdError::NonFinite)
        }
    }

    /// `f(x)`; one evaluation.
    pub fn value(&self, x: &DenseVector) -> Result<f64> {
        self.check_dim(x);
        self.charge(1);
        self.finite(self.objective.eval(x.as_slice()))
    }

    /// `pᵀ∇f(x)` for a single direction.
    ///
    /// Charges 1 (dual), 2 (finite differences), or `d + 1` (analytic).
    pub fn directional_derivative(&self, x: &DenseVector, p: &DenseVector) -> Result<f64> {
        self.check_dim(x);
        assert_eq!(x.dim(), p.dim(), "direction has wrong dimension");
        match self.backend {
            DerivativeBackend::DualAd => {
                self.charge(1);
                self.finite(self.dual_pass(x, p.as_slice()).tangent)
            }
            DerivativeBackend::FiniteDifference { h } => {
                self.charge(2);
                let step = h * x.norm2().max(1.0);
                let base = self.objective.eval(x.as_slice());
                let mut shifted = x.clone();
                shifted.axpy(step, p);
                let ahead = self.objective.eval(shifted.as_slice());
                self.finite((ahead - base) / step)
            }
            DerivativeBackend::Analytic => {
                let (_, grad) = self.value_and_full_gradient(x)?;
                self.finite(grad.dot(p))
            }
        }
    }

    /// `Pᵀ∇f(x)` together with `f(x)`.
    ///
    /// Charged cost: `l` for dual AD (the value rides along on the first
    /// pass), `l + 1` for finite differences (one shared base point), and
    /// `d + 1` for the analytic backend, which cannot produce the subspace
    /// image without the full gradient.
    pub fn value_and_subspace_gradient(
        &self,
        x: &DenseVector,
        p: &DirectionMatrix,
    ) -> Result<(f64, DenseVector)> {
        self.check_dim(x);
        assert_eq!(p.dim(), self.dim(), "direction matrix has wrong row count");
        let ell = p.ell();
        match self.backend {
            DerivativeBackend::DualAd => {
                self.charge(ell as u64);
                let mut components = DenseVector::zeros(ell);
                let mut value = 0.0;
                for j in 0..ell {
                    let out = self.dual_pass(x, p.matrix().col(j));
                    if j == 0 {
                        value = out.value;
                    }
                    components[j] = out.tangent;
                }
                let value = self.finite(value)?;
                if !components.all_finite() {
                    return Err(SsdError::NonFinite);
                }
                Ok((value, components))
            }
            DerivativeBackend::FiniteDifference { h } => {
                self.charge(ell as u64 + 1);
                let step = h * x.norm2().max(1.0);
                let base = self.finite(self.objective.eval(x.as_slice()))?;
                let mut components = DenseVector::zeros(ell);
                let mut shifted = x.clone();
                for j in 0..ell {
                    shifted.as_mut_slice().copy_from_slice(x.as_slice());
                    let col = p.matrix().col(j);
                    for (s, c) in shifted.as_mut_slice().iter_mut().zip(col) {
                        *s += step * c;
                    }
                    components[j] = (self.objective.eval(shifted.as_slice()) - base) / step;
                }
                if !components.all_finite() {
                    return Err(SsdError::NonFinite);
                }
                Ok((base, components))
            }
            DerivativeBackend::Analytic => {
                let (value, grad) = self.value_and_full_gradient(x)?;
                Ok((value, p.transpose_apply(&grad)))
            }
        }
    }

    /// `Pᵀ∇f(x)` alone; same pricing as
    /// [`value_and_subspace_gradient`](Self::value_and_subspace_gradient).
    pub fn subspace_gradient(&self, x: &DenseVector, p: &DirectionMatrix) -> Result<DenseVector> {
        Ok(self.value_and_subspace_gradient(x, p)?.1)
    }

    /// `f(x)` and the full gradient; always charged `d + 1`.
    pub fn value_and_full_gradient(&self, x: &DenseVector) -> Result<(f64, DenseVector)> {
        self.check_dim(x);
        let d = self.dim();
        self.charge(d as u64 + 1);
        match self.backend {
            DerivativeBackend::Analytic => {
                let value = self.finite(self.objective.eval(x.as_slice()))?;
                let mut grad = DenseVector::zeros(d);
                if !self.objective.gradient(x.as_slice(), grad.as_mut_slice()) {
                    return Err(SsdError::Domain(format!(
                        "objective `{}` exposes no analytic gradient",
                        self.objective.name()
                    )));
                }
                if !grad.all_finite() {
                    return Err(SsdError::NonFinite);
                }
                Ok((value, grad))
            }
            DerivativeBackend::DualAd => {
                let mut grad = DenseVector::zeros(d);
                let mut value = 0.0;
                let mut direction = vec![0.0; d];
                for i in 0..d {
                    direction[i] = 1.0;
                    let out = self.dual_pass(x, &direction);
                    direction[i] = 0.0;
                    if i == 0 {
                        value = out.value;
                    }
                    grad[i] = out.tangent;
                }
                let value = self.finite(value)?;
                if !grad.all_finite() {
                    return Err(SsdError::NonFinite);
                }
                Ok((value, grad))
            }
            DerivativeBackend::FiniteDifference { h } => {
                let step = h * x.norm2().max(1.0);
                let base = self.finite(self.objective.eval(x.as_slice()))?;
                let mut grad = DenseVector::zeros(d);
                let mut shifted = x.clone();
                for i in 0..d {
                    shifted[i] = x[i] + step;
                    grad[i] = (self.objective.eval(shifted.as_slice()) - base) / step;
                    shifted[i] = x[i];
                }
                if !grad.all_finite() {
                    return Err(SsdError::NonFinite);
                }
                Ok((base, grad))
            }
        }
    }

    fn dual_pass(&self, x: &DenseVector, direction: &[f64]) -> Dual {
        let seeded: Vec<Dual> = x
            .iter()
            .zip(direction)
            .map(|(&xi, &pi)| Dual::new(xi, pi))
            .collect();
        self.objective.eval_dual(&seeded)
    }
}
