//! `validate-sampler` subcommand: Monte-Carlo spot checks of one sampler
//! against its closed-form properties, reported as JSON.

use crate::{CliError, CliResult};
use serde::Serialize;
use ssd_core::{embedding_probability, embedding_success, sample, DenseVector, RngStream, SamplerScheme};

#[derive(Debug, Serialize)]
pub struct ValidationReport {
    pub scheme: String,
    pub d: usize,
    pub ell: usize,
    pub eps: f64,
    pub draws: u64,
    pub seed: u64,
    /// Empirical embedding-success frequency for the first basis vector.
    pub success_rate: f64,
    /// Closed-form success probability, where one exists for the scheme.
    pub theoretical_delta: Option<f64>,
    /// |success_rate - theoretical_delta| in binomial standard errors.
    pub delta_deviation_sigmas: Option<f64>,
    /// Largest `||PᵀP - (d/l)I||_F` over the draws.
    pub max_structural_residual: f64,
    /// Largest per-coordinate deviation of the mean of `PPᵀv` from `v`.
    pub mean_estimate_max_dev: f64,
    pub estimator_mse: f64,
    pub projection_mse: f64,
    pub expected_estimator_mse: Option<f64>,
    pub expected_projection_mse: Option<f64>,
}

pub fn validate_sampler(
    scheme: &str,
    d: usize,
    ell: usize,
    eps: f64,
    draws: u64,
    seed: u64,
) -> CliResult<ValidationReport> {
    let scheme: SamplerScheme = scheme.parse().map_err(CliError::input)?;
    if ell < 1 || ell > d {
        return Err(CliError::Input(format!(
            "subspace dimension must satisfy 1 <= l <= d, got l={ell}, d={d}"
        )));
    }
    if !(0.0 < eps && eps < 1.0) {
        return Err(CliError::Input(format!(
            "distortion must lie in (0, 1), got {eps}"
        )));
    }
    if draws == 0 {
        return Err(CliError::Input("draws must be at least 1".into()));
    }

    let v = DenseVector::basis(d, 0);
    let mut rng = RngStream::new(seed, 0);
    let mut successes = 0u64;
    let mut max_residual = 0.0f64;
    let mut mean = DenseVector::zeros(d);
    let mut estimator_mse = 0.0;
    let mut projection_mse = 0.0;
    for _ in 0..draws {
        let p = sample(scheme, &mut rng, d, ell);
        if embedding_success(&p, &v, eps).map_err(CliError::input)? {
            successes += 1;
        }
        max_residual = max_residual.max(p.structural_residual());
        let est = p.unbiased_estimate(&v);
        mean.axpy(1.0 / draws as f64, &est);
        estimator_mse += est.sub(&v).norm2().powi(2) / draws as f64;
        projection_mse += p.projection(&v).sub(&v).norm2().powi(2) / draws as f64;
    }
    let success_rate = successes as f64 / draws as f64;

    let theoretical_delta = match scheme {
        SamplerScheme::Haar => Some(embedding_probability(d, ell, eps).map_err(CliError::input)?),
        // A basis vector embeds exactly when its coordinate is among the
        // chosen columns.
        SamplerScheme::Coordinate => Some(ell as f64 / d as f64),
        SamplerScheme::GaussianIid => None,
    };
    let delta_deviation_sigmas = theoretical_delta.and_then(|delta| {
        let var = delta * (1.0 - delta) / draws as f64;
        if var == 0.0 {
            None
        } else {
            Some((success_rate - delta).abs() / var.sqrt())
        }
    });

    let mut mean_dev = 0.0f64;
    for i in 0..d {
        mean_dev = mean_dev.max((mean[i] - v[i]).abs());
    }

    let isometry = scheme.is_structural_isometry();
    Ok(ValidationReport {
        scheme: scheme.to_string(),
        d,
        ell,
        eps,
        draws,
        seed,
        success_rate,
        theoretical_delta,
        delta_deviation_sigmas,
        max_structural_residual: max_residual,
        mean_estimate_max_dev: mean_dev,
        estimator_mse,
        projection_mse,
        expected_estimator_mse: isometry.then(|| d as f64 / ell as f64 - 1.0),
        expected_projection_mse: isometry.then(|| 1.0 - ell as f64 / d as f64),
    })
}
