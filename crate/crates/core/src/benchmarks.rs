//! Desk-scale objective functions with analytic gradients and known
//! minima, plus Dolan-More performance profiles.
//!
//! Each benchmark evaluates through one generic scalar code path, so the
//! plain value, the dual tangent, and the analytic gradient can be
//! cross-checked against each other.

use crate::dual::{Dual, Scalar};
use crate::error::{Result, SsdError};
use crate::linalg::{DenseMatrix, DenseVector};
use crate::oracle::Objective;

#[derive(Debug, Clone)]
enum BenchmarkKind {
    /// `f(x) = lambda·((x_1² + Σ_{i<r}(x_i - x_{i+1})² + x_r²)/2 - x_1)/4`,
    /// a convex chain whose gradient lives on the first `r` coordinates.
    NesterovWorst { r: usize, lambda: f64 },
    /// `f(x) = ½ xᵀ diag(spectrum) x`.
    Quadratic { spectrum: Vec<f64> },
    /// `f(x) = ||Ax - b||²` with `A` rank-deficient and `b` in its range.
    RankDeficientLeastSquares { a: DenseMatrix, b: Vec<f64> },
}

/// An immutable benchmark objective.
#[derive(Debug, Clone)]
pub struct Benchmark {
    name: String,
    dim: usize,
    kind: BenchmarkKind,
    f_star: Option<f64>,
    x_star: Option<DenseVector>,
    gamma: Option<f64>,
    lambda: Option<f64>,
}

impl Benchmark {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn f_star(&self) -> Option<f64> {
        self.f_star
    }

    pub fn x_star(&self) -> Option<&DenseVector> {
        self.x_star.as_ref()
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    /// The single generic evaluation path serving all backends.
    pub fn eval_generic<S: Scalar>(&self, x: &[S]) -> S {
        assert_eq!(x.len(), self.dim, "benchmark expects dimension {}", self.dim);
        match &self.kind {
            BenchmarkKind::NesterovWorst { r, lambda } => {
                let r = *r;
                let mut q = x[0] * x[0];
                for i in 0..r - 1 {
                    let diff = x[i] - x[i + 1];
                    q = q + diff * diff;
                }
                q = q + x[r - 1] * x[r - 1];
                (q * S::from_f64(0.5) - x[0]) * S::from_f64(lambda / 4.0)
            }
            BenchmarkKind::Quadratic { spectrum } => {
                let mut acc = S::from_f64(0.0);
                for (xi, di) in x.iter().zip(spectrum) {
                    acc = acc + *xi * *xi * S::from_f64(*di);
                }
                acc * S::from_f64(0.5)
            }
            BenchmarkKind::RankDeficientLeastSquares { a, b } => {
                let mut acc = S::from_f64(0.0);
                for row in 0..a.rows() {
                    let mut resid = S::from_f64(-b[row]);
                    for col in 0..a.cols() {
                        resid = resid + x[col] * S::from_f64(a[(row, col)]);
                    }
                    acc = acc + resid * resid;
                }
                acc
            }
        }
    }

    pub fn analytic_gradient(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(out.len(), self.dim);
        match &self.kind {
            BenchmarkKind::NesterovWorst { r, lambda } => {
                let r = *r;
                let c = lambda / 4.0;
                out.fill(0.0);
                if r == 1 {
                    out[0] = c * (2.0 * x[0] - 1.0);
                    return;
                }
                out[0] = c * (2.0 * x[0] - x[1] - 1.0);
                for i in 1..r - 1 {
                    out[i] = c * (2.0 * x[i] - x[i - 1] - x[i + 1]);
                }
                out[r - 1] = c * (2.0 * x[r - 1] - x[r - 2]);
            }
            BenchmarkKind::Quadratic { spectrum } => {
                for i in 0..self.dim {
                    out[i] = spectrum[i] * x[i];
                }
            }
            BenchmarkKind::RankDeficientLeastSquares { a, b } => {
                // 2 Aᵀ (Ax - b)
                let mut resid = vec![0.0; a.rows()];
                for (col, &xc) in x.iter().enumerate() {
                    if xc == 0.0 {
                        continue;
                    }
                    for (ri, aij) in resid.iter_mut().zip(a.col(col)) {
                        *ri += aij * xc;
                    }
                }
                for (ri, bi) in resid.iter_mut().zip(b) {
                    *ri -= bi;
                }
                for (col, o) in out.iter_mut().enumerate() {
                    *o = 2.0
                        * a.col(col)
                            .iter()
                            .zip(&resid)
                            .map(|(aij, ri)| aij * ri)
                            .sum::<f64>();
                }
            }
        }
    }
}

impl Objective for Benchmark {
    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.eval_generic::<f64>(x)
    }

    fn eval_dual(&self, x: &[Dual]) -> Dual {
        self.eval_generic::<Dual>(x)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> bool {
        self.analytic_gradient(x, out);
        true
    }

    fn minimum(&self) -> Option<f64> {
        self.f_star
    }

    fn minimizer(&self) -> Option<DenseVector> {
        self.x_star.clone()
    }

    fn lipschitz(&self) -> Option<f64> {
        self.lambda
    }

    fn strong_convexity(&self) -> Option<f64> {
        self.gamma
    }
}

/// The chained "worst function" with intrinsic dimension `r < d` and
/// gradient Lipschitz constant `lambda`.
///
/// Its minimum `-lambda·r / (8(r+1))` is attained at
/// `x_i = 1 - i/(r+1)` on the first `r` coordinates and is unaffected by
/// the remaining `d - r`, which makes it a clean probe for dimension
/// (in)dependence of subspace methods.
pub fn nesterov_worst(d: usize, r: usize, lambda: f64) -> Result<Benchmark> {
    if r < 1 || r >= d {
        return Err(SsdError::Domain(format!(
            "intrinsic dimension must satisfy 1 <= r < d, got r={r}, d={d}"
        )));
    }
    if !(lambda > 0.0) {
        return Err(SsdError::Domain(format!(
            "Lipschitz constant must be positive, got {lambda}"
        )));
    }
    let f_star = -lambda * r as f64 / (8.0 * (r as f64 + 1.0));
    let mut x_star = DenseVector::zeros(d);
    for i in 1..=r {
        x_star[i - 1] = 1.0 - i as f64 / (r as f64 + 1.0);
    }
    Ok(Benchmark {
        name: format!("nesterov_worst(d={d},r={r},lambda={lambda})"),
        dim: d,
        kind: BenchmarkKind::NesterovWorst { r, lambda },
        f_star: Some(f_star),
        x_star: Some(x_star),
        gamma: None,
        lambda: Some(lambda),
    })
}

/// Strongly convex diagonal quadratic with a log-uniform spectrum
/// interpolating `[gamma, lambda]`.
pub fn quadratic(d: usize, gamma: f64, lambda: f64) -> Result<Benchmark> {
    if !(0.0 < gamma && gamma <= lambda) {
        return Err(SsdError::Domain(format!(
            "curvature bounds must satisfy 0 < gamma <= lambda, got {gamma}, {lambda}"
        )));
    }
    let spectrum: Vec<f64> = if d == 1 {
        vec![lambda]
    } else {
        (0..d)
            .map(|i| gamma * (lambda / gamma).powf(i as f64 / (d as f64 - 1.0)))
            .collect()
    };
    quadratic_with_spectrum(spectrum)
}

/// Diagonal quadratic with an explicit positive spectrum.
pub fn quadratic_with_spectrum(spectrum: Vec<f64>) -> Result<Benchmark> {
    if spectrum.is_empty() {
        return Err(SsdError::EmptyInput("quadratic spectrum".into()));
    }
    if spectrum.iter().any(|v| !(*v > 0.0)) {
        return Err(SsdError::Domain("spectrum entries must be positive".into()));
    }
    let d = spectrum.len();
    let gamma = spectrum.iter().cloned().fold(f64::INFINITY, f64::min);
    let lambda = spectrum.iter().cloned().fold(0.0f64, f64::max);
    Ok(Benchmark {
        name: format!("quadratic(d={d},gamma={gamma},lambda={lambda})"),
        dim: d,
        kind: BenchmarkKind::Quadratic { spectrum },
        f_star: Some(0.0),
        x_star: Some(DenseVector::zeros(d)),
        gamma: Some(gamma),
        lambda: Some(lambda),
    })
}

/// `||Ax - b||²` with `A` of the requested rank (`rank < d`, `rank <= n`)
/// and `b` in the range of `A`, so the minimum value 0 is attained on an
/// affine set rather than at a point.
///
/// The function is not strongly convex but satisfies the PL inequality
/// with `gamma = 2·sigma_min_pos²`, where `sigma_min_pos` is the smallest
/// nonzero singular value.
pub fn rankdef_least_squares(n: usize, d: usize, rank: usize) -> Result<Benchmark> {
    if rank < 1 || rank >= d || rank > n {
        return Err(SsdError::Domain(format!(
            "rank must satisfy 1 <= rank < d and rank <= n, got rank={rank}, d={d}, n={n}"
        )));
    }
    // Singular values spaced linearly in [1, 2]; the exact shape is
    // unimportant as long as it is known for the PL constant.
    let sigmas: Vec<f64> = (0..rank)
        .map(|i| {
            if rank == 1 {
                1.0
            } else {
                1.0 + i as f64 / (rank as f64 - 1.0)
            }
        })
        .collect();

    // A = H_u · S · H_vᵀ with fixed Householder reflectors mixing the
    // rows and columns, keeping construction deterministic.
    let u = householder_vector(n, 3);
    let v = householder_vector(d, 5);
    let mut a = DenseMatrix::zeros(n, d);
    for col in 0..d {
        // column of H_vᵀ = H_v e_col
        let hv = apply_householder(&v, col);
        // S · hv keeps the first `rank` entries scaled
        let mut s_hv = vec![0.0; n];
        for i in 0..rank.min(hv.len()) {
            s_hv[i] = sigmas[i] * hv[i];
        }
        // H_u · s_hv
        let dot: f64 = u.iter().zip(&s_hv).map(|(ui, si)| ui * si).sum();
        let unorm2: f64 = u.iter().map(|ui| ui * ui).sum();
        for row in 0..n {
            a[(row, col)] = s_hv[row] - 2.0 * dot / unorm2 * u[row];
        }
    }
    let x_ref = DenseVector::from_vec(vec![1.0; d]);
    let b = a.matvec(&x_ref).into_vec();
    let sigma_min = sigmas[0];
    let sigma_max = sigmas[rank - 1];
    Ok(Benchmark {
        name: format!("rankdef_least_squares(n={n},d={d},rank={rank})"),
        dim: d,
        kind: BenchmarkKind::RankDeficientLeastSquares { a, b },
        f_star: Some(0.0),
        x_star: None,
        gamma: Some(2.0 * sigma_min * sigma_min),
        lambda: Some(2.0 * sigma_max * sigma_max),
    })
}

fn householder_vector(n: usize, phase: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + ((i + phase) % 7) as f64 / 7.0).collect()
}

/// `(I - 2uuᵀ/||u||²) e_col`.
fn apply_householder(u: &[f64], col: usize) -> Vec<f64> {
    let unorm2: f64 = u.iter().map(|ui| ui * ui).sum();
    let scale = 2.0 * u[col] / unorm2;
    let mut out: Vec<f64> = u.iter().map(|ui| -scale * ui).collect();
    out[col] += 1.0;
    out
}

/// Per-solver evaluation counts feeding a performance profile. `None`
/// marks a trial that never reached the threshold.
#[derive(Debug, Clone)]
pub struct SolverRuns {
    pub solver: String,
    pub fevals: Vec<Option<u64>>,
}

/// One step of a profile curve: the fraction of trials solved within
/// `tau` times the best cost observed anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePoint {
    pub tau: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone)]
pub struct ProfileCurve {
    pub solver: String,
    /// Step-function breakpoints in increasing `tau`; the curve is 0
    /// before the first point and holds each fraction until the next.
    pub points: Vec<ProfilePoint>,
    /// Upper asymptote: the fraction of successful trials.
    pub success_fraction: f64,
}

/// Dolan-More performance profiles.
///
/// `tau = 1` is the fewest evaluations required in any trial of any
/// solver; a solver's curve at `tau` is the fraction of its trials that
/// finished within `tau` times that best cost. Unsuccessful trials never
/// count, so each curve is bounded by its solver's success fraction.
pub fn performance_profile(runs: &[SolverRuns]) -> Result<Vec<ProfileCurve>> {
    if runs.is_empty() {
        return Err(SsdError::EmptyInput("no solvers supplied".into()));
    }
    let best = runs
        .iter()
        .flat_map(|r| r.fevals.iter().flatten())
        .min()
        .copied()
        .ok_or_else(|| SsdError::EmptyInput("no successful trial in any solver".into()))?;
    let best = best.max(1) as f64;

    let mut curves = Vec::with_capacity(runs.len());
    for run in runs {
        if run.fevals.is_empty() {
            return Err(SsdError::EmptyInput(format!(
                "solver `{}` has no trials",
                run.solver
            )));
        }
        let total = run.fevals.len() as f64;
        let mut successes: Vec<u64> = run.fevals.iter().flatten().copied().collect();
        successes.sort_unstable();
        let mut points = Vec::new();
        for (i, m) in successes.iter().enumerate() {
            let tau = *m as f64 / best;
            let fraction = (i + 1) as f64 / total;
            // Collapse duplicate costs into the highest fraction.
            if let Some(last) = points.last_mut() {
                let last: &mut ProfilePoint = last;
                if last.tau == tau {
                    last.fraction = fraction;
                    continue;
                }
            }
            points.push(ProfilePoint { tau, fraction });
        }
        curves.push(ProfileCurve {
            solver: run.solver.clone(),
            success_fraction: successes.len() as f64 / total,
            points,
        });
    }
    Ok(curves)
}
