//! Closed-form rate and embedding analytics.
//!
//! Everything here is exact mathematics rather than simulation: the
//! regularized incomplete Beta function, the probability that a Haar draw
//! embeds a fixed vector with bounded distortion, the optimal sub-Gaussian
//! proxy variance for binomial tails, and the expected-rate /
//! high-probability bound curves those quantities produce.

use crate::error::{Result, SsdError};
use serde::{Deserialize, Serialize};

/// Absolute accuracy target for [`beta_cdf`].
const BETA_EPS: f64 = 1e-15;
const BETA_MAX_ITER: usize = 300;

/// Regularized incomplete Beta function `I_p(a, b)`, the CDF of a
/// `Beta(a, b)` variable at `p`.
///
/// Evaluated by a modified Lentz continued fraction with the usual
/// symmetry split at `p > (a + 1)/(a + b + 2)`; absolute error is below
/// `1e-12` across the parameter range used here.
pub fn beta_cdf(p: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(SsdError::Domain(format!(
            "beta_cdf requires a > 0 and b > 0, got a={a}, b={b}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(SsdError::Domain(format!(
            "beta_cdf requires p in [0, 1], got {p}"
        )));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    if p > (a + 1.0) / (a + b + 2.0) {
        Ok(1.0 - beta_cf(1.0 - p, b, a)?)
    } else {
        beta_cf(p, a, b)
    }
}

/// `I_p(a, b)` via the continued fraction, valid on the direct branch.
fn beta_cf(p: f64, a: f64, b: f64) -> Result<f64> {
    let ln_prefix = a * p.ln() + b * (1.0 - p).ln() - ln_beta(a, b);
    let prefix = ln_prefix.exp() / a;

    let tiny = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * p / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=BETA_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let even = m * (b - m) * p / ((qam + m2) * (a + m2));
        d = 1.0 + even * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + even / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;

        let odd = -(a + m) * (qab + m) * p / ((a + m2) * (qap + m2));
        d = 1.0 + odd * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + odd / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;

        if (delta - 1.0).abs() < BETA_EPS {
            return Ok((prefix * h).clamp(0.0, 1.0));
        }
    }
    Err(SsdError::Domain(format!(
        "beta_cdf continued fraction failed to converge for p={p}, a={a}, b={b}"
    )))
}

/// `ln Γ(z)` by the Lanczos approximation (g = 7, 9 terms).
fn ln_gamma(z: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.323428777653,
        -176.6150291621406,
        12.507343278686905,
        -0.13857109526572012,
        9.984369578019572e-6,
        1.5056327351493116e-7,
    ];
    if z < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * z).sin()).ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = 0.999_999_999_999_809_9;
    for (i, c) in COEFFS.iter().enumerate() {
        x += c / (z + i as f64 + 1.0);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Probability that a Haar-distributed `d x l` direction matrix embeds a
/// fixed vector with distortion at most `eps`:
/// `delta = 1 - I_{(1-eps)·l/d}(l/2, (d-l)/2)`.
///
/// The squared image norm of a unit vector, rescaled by `l/d`, is a
/// `Beta(l/2, (d-l)/2)` variable, so the success probability is an exact
/// Beta tail. `l = d` is the degenerate exact-isometry case and returns 1.
pub fn embedding_probability(d: usize, ell: usize, eps: f64) -> Result<f64> {
    if ell < 1 || ell > d {
        return Err(SsdError::Domain(format!(
            "embedding probability requires 1 <= l <= d, got l={ell}, d={d}"
        )));
    }
    if !(0.0 < eps && eps < 1.0) {
        return Err(SsdError::Domain(format!(
            "distortion must lie in (0, 1), got {eps}"
        )));
    }
    if ell == d {
        return Ok(1.0);
    }
    let p = (1.0 - eps) * ell as f64 / d as f64;
    Ok(1.0 - beta_cdf(p, ell as f64 / 2.0, (d - ell) as f64 / 2.0)?)
}

/// Optimal sub-Gaussian proxy variance for a `Binomial(k, delta)` count:
/// `sigma_k² = k(1 - 2·delta) / (2·ln((1 - delta)/delta))`, extended by
/// continuity to `k/4` at `delta = 1/2`. Both binomial tails then obey
/// `P(|B - k·delta| > t) <= exp(-t²/(2·sigma_k²))`.
pub fn proxy_variance(k: usize, delta: f64) -> Result<f64> {
    if k < 1 {
        return Err(SsdError::Domain("horizon k must be at least 1".into()));
    }
    if !(0.0 < delta && delta < 1.0) {
        return Err(SsdError::Domain(format!(
            "success probability must lie in (0, 1), got {delta}"
        )));
    }
    if delta == 0.5 {
        return Ok(k as f64 / 4.0);
    }
    Ok(k as f64 * (1.0 - 2.0 * delta) / (2.0 * ((1.0 - delta) / delta).ln()))
}

/// Per-step contraction factor of the expected error under the
/// theory-prescribed fixed step: `omega = 1 - l·gamma/(d·lambda)`.
pub fn ssd_rate_factor(d: usize, ell: usize, gamma: f64, lambda: f64) -> f64 {
    1.0 - ell as f64 * gamma / (d as f64 * lambda)
}

/// Contraction factor of the classical one-direction Gaussian-smoothing
/// analysis, `1 - gamma/(8·lambda·(d + 4))`, for comparison against
/// [`ssd_rate_factor`].
pub fn gaussian_smoothing_rate_factor(d: usize, gamma: f64, lambda: f64) -> f64 {
    1.0 - gamma / (8.0 * lambda * (d as f64 + 4.0))
}

/// Inputs for the closed-form rate computations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoryParams {
    pub d: usize,
    pub ell: usize,
    /// Embedding distortion in (0, 1).
    pub eps: f64,
    pub gamma: f64,
    pub lambda: f64,
    /// Iteration horizon for the bound curves.
    pub horizon: usize,
    /// Tail offset in (0, delta]; trades rate against confidence.
    pub t: f64,
    /// Sublevel-set radius for the convex `2·d·lambda·R²/(k·l)` bound.
    pub radius: Option<f64>,
}

impl TheoryParams {
    pub fn validate(&self) -> Result<()> {
        if self.ell < 1 || self.ell > self.d {
            return Err(SsdError::Domain(format!(
                "need 1 <= l <= d, got l={}, d={}",
                self.ell, self.d
            )));
        }
        if !(0.0 < self.eps && self.eps < 1.0) {
            return Err(SsdError::Domain(format!(
                "distortion must lie in (0, 1), got {}",
                self.eps
            )));
        }
        if !(0.0 < self.gamma && self.gamma <= self.lambda) {
            return Err(SsdError::Domain(format!(
                "need 0 < gamma <= lambda, got gamma={}, lambda={}",
                self.gamma, self.lambda
            )));
        }
        if self.horizon < 1 {
            return Err(SsdError::Domain("horizon must be at least 1".into()));
        }
        if let Some(r) = self.radius {
            if !(r > 0.0) {
                return Err(SsdError::Domain(format!("radius must be positive, got {r}")));
            }
        }
        Ok(())
    }
}

/// Expected-rate bound curves over `k = 1..=horizon`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateBounds {
    pub omega: f64,
    /// `omega^k · f0_err` (strong convexity or PL).
    pub strongly_convex: Vec<f64>,
    /// `2·d·lambda·R²/(k·l)` (convex; present when a radius is supplied).
    pub convex: Option<Vec<f64>>,
    /// `2·d·lambda·f0_err/((k+1)·l)` bound on the smallest expected
    /// squared gradient norm (non-convex).
    pub nonconvex: Vec<f64>,
}

/// Expected-rate bounds for an initial error `f0_err`.
pub fn expected_rate_bounds(params: &TheoryParams, f0_err: f64) -> Result<RateBounds> {
    params.validate()?;
    if !(f0_err >= 0.0) {
        return Err(SsdError::Domain(format!(
            "initial error must be nonnegative, got {f0_err}"
        )));
    }
    let omega = ssd_rate_factor(params.d, params.ell, params.gamma, params.lambda);
    let dl = params.d as f64 * params.lambda;
    let ell = params.ell as f64;
    let ks = 1..=params.horizon;

    let strongly_convex = ks.clone().map(|k| omega.powi(k as i32) * f0_err).collect();
    let convex = params.radius.map(|r| {
        ks.clone()
            .map(|k| 2.0 * dl * r * r / (k as f64 * ell))
            .collect()
    });
    let nonconvex = ks
        .map(|k| 2.0 * dl * f0_err / ((k as f64 + 1.0) * ell))
        .collect();
    Ok(RateBounds {
        omega,
        strongly_convex,
        convex,
        nonconvex,
    })
}

/// High-probability rate: with probability at least `1 - tail(k)`, the
/// error after `k` steps is below `rho^k` times the initial error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HighProbBound {
    pub delta: f64,
    pub rho: f64,
    /// `exp(-(k·t)²/(2·sigma_k²))` over `k = 1..=horizon`.
    pub tail: Vec<f64>,
}

/// High-probability contraction `rho = (1 - (1-eps)·l·gamma/(d·lambda))^(delta - t)`
/// together with its per-horizon confidence tail.
///
/// The count of successful embeddings over `k` iterations is binomial
/// with success probability `delta`; the tail applies the proxy-variance
/// bound to that count at offset `k·t`.
pub fn high_prob_bound(params: &TheoryParams) -> Result<HighProbBound> {
    params.validate()?;
    let delta = embedding_probability(params.d, params.ell, params.eps)?;
    if !(params.t > 0.0 && params.t <= delta) {
        return Err(SsdError::Domain(format!(
            "tail offset must lie in (0, delta], got t={}, delta={delta}",
            params.t
        )));
    }
    let base = 1.0
        - (1.0 - params.eps) * params.ell as f64 * params.gamma
            / (params.d as f64 * params.lambda);
    let rho = base.powf(delta - params.t);
    let tail = (1..=params.horizon)
        .map(|k| {
            if delta >= 1.0 {
                // Degenerate exact-isometry regime: every embedding
                // succeeds, the binomial tail vanishes.
                return Ok(0.0);
            }
            let sigma_sq = proxy_variance(k, delta)?;
            let kt = k as f64 * params.t;
            Ok((-(kt * kt) / (2.0 * sigma_sq)).exp())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(HighProbBound { delta, rho, tail })
}

/// Everything the analytics layer knows about one parameter set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoryReport {
    pub params: TheoryParams,
    pub delta: f64,
    pub omega: f64,
    pub rho: f64,
    /// Proxy variance at the full horizon.
    pub sigma_sq: f64,
    pub bounds: RateBounds,
    pub tail: Vec<f64>,
    pub ssd_factor: f64,
    pub gaussian_smoothing_factor: f64,
}

/// Assembles the full report for a parameter set and initial error.
pub fn theory_report(params: &TheoryParams, f0_err: f64) -> Result<TheoryReport> {
    let bounds = expected_rate_bounds(params, f0_err)?;
    let hp = high_prob_bound(params)?;
    let sigma_sq = if hp.delta >= 1.0 {
        0.0
    } else {
        proxy_variance(params.horizon, hp.delta)?
    };
    Ok(TheoryReport {
        params: params.clone(),
        delta: hp.delta,
        omega: bounds.omega,
        rho: hp.rho,
        sigma_sq,
        ssd_factor: ssd_rate_factor(params.d, params.ell, params.gamma, params.lambda),
        gaussian_smoothing_factor: gaussian_smoothing_rate_factor(
            params.d,
            params.gamma,
            params.lambda,
        ),
        bounds,
        tail: hp.tail,
    })
}
