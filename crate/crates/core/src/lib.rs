//! Gradient-free optimization by stochastic subspace descent.
//!
//! The iteration `x_{k+1} = x_k - alpha·P_k P_kᵀ ∇f(x_k)` descends along
//! `l` random directional derivatives per step instead of the full
//! gradient, which keeps the per-iteration cost at `l` function
//! evaluations (via forward-mode AD or finite differences) regardless of
//! the ambient dimension. This crate provides:
//!
//! * [`sampler`] — Haar, block-coordinate, and iid-Gaussian direction
//!   matrices with their structural guarantees;
//! * [`oracle`] — objective oracles with analytic, dual-number, and
//!   finite-difference derivative backends under one cost model;
//! * [`optimizer`] — the descent recursion with fixed and Armijo
//!   backtracking step policies, plus a full-gradient baseline;
//! * [`analytics`] — exact embedding probabilities, sub-Gaussian proxy
//!   variances, and convergence-bound curves;
//! * [`benchmarks`] — test objectives with known minima and Dolan-More
//!   performance profiles;
//! * [`linalg`], [`rng`], [`dual`] — the dense kernels, reproducible
//!   random streams, and forward-mode duals underneath.

// `!(x > 0.0)` rejects NaN along with the wrong sign; `x <= 0.0` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod benchmarks;
pub mod dual;
pub mod error;
pub mod linalg;
pub mod optimizer;
pub mod oracle;
pub mod rng;
pub mod sampler;

pub use analytics::{
    beta_cdf, embedding_probability, expected_rate_bounds, gaussian_smoothing_rate_factor,
    high_prob_bound, proxy_variance, ssd_rate_factor, theory_report, HighProbBound, RateBounds,
    TheoryParams, TheoryReport,
};
pub use benchmarks::{
    nesterov_worst, performance_profile, quadratic, quadratic_with_spectrum,
    rankdef_least_squares, Benchmark, ProfileCurve, ProfilePoint, SolverRuns,
};
pub use dual::{directional_derivative, Dual, Scalar};
pub use error::{Result, SsdError};
pub use linalg::{qr_thin, DenseMatrix, DenseVector};
pub use optimizer::{
    fixed_step_limit, gradient_descent, relative_error, run, ssd_step, theory_fixed_step,
    OptimizerConfig, OptimizerTrace, StepPolicy, Termination, TraceRecord,
};
pub use oracle::{DerivativeBackend, Objective, ObjectiveOracle};
pub use rng::{gaussian_matrix, gaussian_vector, RngStream};
pub use sampler::{
    embedding_success, sample, sample_coordinate, sample_gaussian_iid, sample_haar,
    DirectionMatrix, SamplerScheme,
};
