//! Random direction matrices.
//!
//! A [`DirectionMatrix`] is a `d x l` sample `P` used to restrict descent
//! to the random subspace spanned by its columns. The `haar` and
//! `coordinate` schemes satisfy the structural identity
//! `PᵀP = (d/l)·I` on every draw together with `E[PPᵀ] = I`; the
//! `gaussian-iid` scheme is kept only as a smoothing-style baseline and
//! deliberately violates the structural identity.

use crate::error::{Result, SsdError};
use crate::linalg::{qr_thin, DenseMatrix, DenseVector};
use crate::rng::{gaussian_matrix, RngStream};
use serde::{Deserialize, Serialize};

/// Which distribution a direction matrix was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerScheme {
    /// `sqrt(d/l) · Q I_{d x l}` with `Q` from the QR factorization of a
    /// Gaussian matrix: `l` columns of a uniformly random rotation.
    Haar,
    /// `sqrt(d/l)` times `l` distinct identity columns chosen uniformly:
    /// randomized block-coordinate descent.
    Coordinate,
    /// Columns iid `N(0, I_d)/sqrt(l)`. Unbiased (`E[PPᵀ] = I`) but not an
    /// isometry on its row space; baseline only.
    GaussianIid,
}

impl SamplerScheme {
    /// Whether every draw satisfies `PᵀP = (d/l)·I` exactly (up to
    /// factorization rounding).
    pub fn is_structural_isometry(self) -> bool {
        !matches!(self, SamplerScheme::GaussianIid)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SamplerScheme::Haar => "haar",
            SamplerScheme::Coordinate => "coordinate",
            SamplerScheme::GaussianIid => "gaussian-iid",
        }
    }
}

impl std::fmt::Display for SamplerScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SamplerScheme {
    type Err = SsdError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" => Ok(SamplerScheme::Haar),
            "coordinate" => Ok(SamplerScheme::Coordinate),
            "gaussian-iid" => Ok(SamplerScheme::GaussianIid),
            other => Err(SsdError::Domain(format!("unknown sampler scheme `{other}`"))),
        }
    }
}

/// One sampled `d x l` direction matrix.
#[derive(Debug, Clone)]
pub struct DirectionMatrix {
    matrix: DenseMatrix,
    scheme: SamplerScheme,
    /// Selected identity columns, present for the coordinate scheme.
    columns: Option<Vec<usize>>,
}

impl DirectionMatrix {
    /// Wraps an explicit matrix; used by tests and custom schemes.
    pub fn from_matrix(matrix: DenseMatrix, scheme: SamplerScheme) -> Self {
        Self {
            matrix,
            scheme,
            columns: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn ell(&self) -> usize {
        self.matrix.cols()
    }

    pub fn scheme(&self) -> SamplerScheme {
        self.scheme
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    /// For the coordinate scheme, the chosen identity-column indices.
    pub fn coordinate_indices(&self) -> Option<&[usize]> {
        self.columns.as_deref()
    }

    /// `Pᵀ v` (length `l`).
    pub fn transpose_apply(&self, v: &DenseVector) -> DenseVector {
        self.matrix.mat_t_vec(v)
    }

    /// `P w` (length `d`).
    pub fn apply(&self, w: &DenseVector) -> DenseVector {
        self.matrix.matvec(w)
    }

    /// The unbiased reconstruction `P Pᵀ v`; averages to `v` over draws.
    pub fn unbiased_estimate(&self, v: &DenseVector) -> DenseVector {
        self.apply(&self.transpose_apply(v))
    }

    /// Orthogonal projection of `v` onto the column space, `(l/d)·PPᵀv`.
    ///
    /// Valid as an exact projection for the structural-isometry schemes,
    /// whose columns are orthogonal with squared norm `d/l`; for the
    /// gaussian-iid baseline this is only an approximation.
    pub fn projection(&self, v: &DenseVector) -> DenseVector {
        let mut p = self.unbiased_estimate(v);
        p.scale(self.ell() as f64 / self.dim() as f64);
        p
    }

    /// `PᵀP - (d/l)·I` in Frobenius norm; the structural residual.
    pub fn structural_residual(&self) -> f64 {
        let scale = self.dim() as f64 / self.ell() as f64;
        let mut g = self.matrix.gram();
        for i in 0..g.rows() {
            g[(i, i)] -= scale;
        }
        g.frobenius_norm()
    }
}

fn check_dims(d: usize, ell: usize) {
    assert!(
        ell >= 1 && ell <= d,
        "subspace dimension must satisfy 1 <= l <= d, got l={ell}, d={d}"
    );
}

/// Haar draw: `P = sqrt(d/l) · Q` with `Q` the thin-QR orthogonal factor
/// of a `d x l` Gaussian matrix, sign-fixed so `R_ii > 0`.
///
/// Truncating the QR of Gaussian noise this way spans a uniformly random
/// `l`-dimensional subspace at `O(d l²)` cost. Rank deficiency of the
/// Gaussian input has probability zero and is treated as fatal.
pub fn sample_haar(rng: &mut RngStream, d: usize, ell: usize) -> DirectionMatrix {
    check_dims(d, ell);
    let z = gaussian_matrix(rng, d, ell);
    let (mut q, _r) = qr_thin(&z).expect("Gaussian matrix was numerically rank-deficient");
    let scale = (d as f64 / ell as f64).sqrt();
    for j in 0..ell {
        for v in q.col_mut(j) {
            *v *= scale;
        }
    }
    DirectionMatrix {
        matrix: q,
        scheme: SamplerScheme::Haar,
        columns: None,
    }
}

/// Coordinate draw: `sqrt(d/l)` times `l` distinct identity columns chosen
/// uniformly without replacement (partial Fisher-Yates).
pub fn sample_coordinate(rng: &mut RngStream, d: usize, ell: usize) -> DirectionMatrix {
    check_dims(d, ell);
    let mut pool: Vec<usize> = (0..d).collect();
    for i in 0..ell {
        let j = i + rng.next_index(d - i);
        pool.swap(i, j);
    }
    let chosen = &pool[..ell];
    let scale = (d as f64 / ell as f64).sqrt();
    let mut m = DenseMatrix::zeros(d, ell);
    for (j, &row) in chosen.iter().enumerate() {
        m[(row, j)] = scale;
    }
    DirectionMatrix {
        matrix: m,
        scheme: SamplerScheme::Coordinate,
        columns: Some(chosen.to_vec()),
    }
}

/// Gaussian-smoothing baseline: columns iid `N(0, I_d)`, scaled by
/// `1/sqrt(l)` so that `E[PPᵀ] = I`. Does not satisfy `PᵀP = (d/l)·I`.
pub fn sample_gaussian_iid(rng: &mut RngStream, d: usize, ell: usize) -> DirectionMatrix {
    check_dims(d, ell);
    let mut m = gaussian_matrix(rng, d, ell);
    let scale = 1.0 / (ell as f64).sqrt();
    for j in 0..ell {
        for v in m.col_mut(j) {
            *v *= scale;
        }
    }
    DirectionMatrix {
        matrix: m,
        scheme: SamplerScheme::GaussianIid,
        columns: None,
    }
}

/// Draws from the given scheme.
pub fn sample(scheme: SamplerScheme, rng: &mut RngStream, d: usize, ell: usize) -> DirectionMatrix {
    match scheme {
        SamplerScheme::Haar => sample_haar(rng, d, ell),
        SamplerScheme::Coordinate => sample_coordinate(rng, d, ell),
        SamplerScheme::GaussianIid => sample_gaussian_iid(rng, d, ell),
    }
}

/// Whether `P` embeds `v` successfully at distortion `eps`:
/// `||Pᵀv||² >= (1 - eps)·||v||²`.
pub fn embedding_success(p: &DirectionMatrix, v: &DenseVector, eps: f64) -> Result<bool> {
    if !(0.0..1.0).contains(&eps) || eps == 0.0 {
        return Err(SsdError::Domain(format!(
            "distortion must lie in (0, 1), got {eps}"
        )));
    }
    let vnorm2 = v.dot(v);
    if vnorm2 == 0.0 {
        return Err(SsdError::Domain(
            "embedding success is undefined for the zero vector".into(),
        ));
    }
    let image = p.transpose_apply(v);
    Ok(image.dot(&image) >= (1.0 - eps) * vnorm2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_draws_satisfy_structural_identity() {
        let mut rng = RngStream::new(7, 0);
        for _ in 0..100 {
            let p = sample_haar(&mut rng, 50, 5);
            assert!(p.structural_residual() <= 1e-10);
        }
    }

    #[test]
    fn haar_full_dimension_reproduces_the_vector() {
        let mut rng = RngStream::new(7, 1);
        let p = sample_haar(&mut rng, 12, 12);
        let v = crate::rng::gaussian_vector(&mut rng, 12);
        let rec = p.unbiased_estimate(&v);
        let err = rec.sub(&v).norm2();
        assert!(err <= 1e-10 * v.norm2(), "reconstruction error {err}");
    }

    #[test]
    fn coordinate_draw_has_exactly_ell_nonzeros_and_distinct_columns() {
        let mut rng = RngStream::new(11, 0);
        for _ in 0..50 {
            let p = sample_coordinate(&mut rng, 10, 3);
            let mut nonzeros = 0;
            for j in 0..3 {
                nonzeros += p.matrix().col(j).iter().filter(|v| **v != 0.0).count();
            }
            assert_eq!(nonzeros, 3);
            let mut idx = p.coordinate_indices().unwrap().to_vec();
            idx.sort_unstable();
            idx.dedup();
            assert_eq!(idx.len(), 3);
            assert!(p.structural_residual() <= 1e-12);
        }
    }

    #[test]
    fn coordinate_full_dimension_is_a_permutation() {
        let mut rng = RngStream::new(11, 1);
        let p = sample_coordinate(&mut rng, 6, 6);
        let v = crate::rng::gaussian_vector(&mut rng, 6);
        assert_eq!(p.unbiased_estimate(&v), v);
    }

    #[test]
    fn coordinate_matches_block_selection_law() {
        // P(||sqrt(l/d) Pᵀ e_1||² = 1) = l/d; Var ||Pᵀ e_1||² = d/l - 1.
        let (d, ell, n) = (10usize, 2usize, 30_000usize);
        let mut rng = RngStream::new(21, 0);
        let v = DenseVector::basis(d, 0);
        let mut hits = 0usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let p = sample_coordinate(&mut rng, d, ell);
            let image = p.transpose_apply(&v);
            let norm2 = image.dot(&image);
            let descaled = norm2 * ell as f64 / d as f64;
            if (descaled - 1.0).abs() < 1e-12 {
                hits += 1;
            } else {
                assert!(descaled.abs() < 1e-12, "block norm must be 0 or 1");
            }
            sum += norm2;
            sumsq += norm2 * norm2;
        }
        let rate = hits as f64 / n as f64;
        let expect = ell as f64 / d as f64;
        let sigma = (expect * (1.0 - expect) / n as f64).sqrt();
        assert!((rate - expect).abs() <= 3.0 * sigma, "rate {rate}");
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        let var_expect = d as f64 / ell as f64 - 1.0;
        assert!((var - var_expect).abs() <= 0.05 * var_expect, "variance {var}");
    }

    #[test]
    fn gaussian_iid_is_unbiased_but_not_isometric() {
        let (d, ell) = (20usize, 4usize);
        let mut rng = RngStream::new(31, 0);
        let v = crate::rng::gaussian_vector(&mut rng, d);
        let n = 20_000usize;
        let mut mean = DenseVector::zeros(d);
        for _ in 0..n {
            let p = sample_gaussian_iid(&mut rng, d, ell);
            mean.axpy(1.0 / n as f64, &p.unbiased_estimate(&v));
        }
        let dev = mean.sub(&v).norm2() / v.norm2();
        assert!(dev < 0.05, "relative deviation of the mean: {dev}");

        // A single full-dimension draw does not reproduce v.
        let p = sample_gaussian_iid(&mut rng, d, d);
        let err = p.unbiased_estimate(&v).sub(&v).norm2() / v.norm2();
        assert!(err > 1e-3, "iid Gaussian directions should not be exact");
        assert!(p.structural_residual() > 1e-3);
    }

    #[test]
    fn gaussian_iid_single_column_is_a_scaled_gaussian() {
        let p = sample_gaussian_iid(&mut RngStream::new(31, 9), 8, 1);
        let direct = gaussian_matrix(&mut RngStream::new(31, 9), 8, 1);
        for i in 0..8 {
            assert!((p.matrix()[(i, 0)] - direct[(i, 0)]).abs() < 1e-15);
        }
    }

    #[test]
    fn unbiased_estimate_mean_approaches_identity_action() {
        let (d, ell, n) = (20usize, 4usize, 40_000usize);
        let mut rng = RngStream::new(41, 0);
        let v = crate::rng::gaussian_vector(&mut rng, d);
        let mut sum = DenseVector::zeros(d);
        let mut sumsq = DenseVector::zeros(d);
        for _ in 0..n {
            let e = sample_haar(&mut rng, d, ell).unbiased_estimate(&v);
            for i in 0..d {
                sum[i] += e[i];
                sumsq[i] += e[i] * e[i];
            }
        }
        for i in 0..d {
            let mean = sum[i] / n as f64;
            let var = sumsq[i] / n as f64 - mean * mean;
            let se = (var / n as f64).sqrt();
            assert!(
                (mean - v[i]).abs() <= 4.0 * se,
                "coordinate {i}: mean {mean} vs {} (se {se})",
                v[i]
            );
        }
    }

    #[test]
    fn embedding_success_trivial_cases() {
        let mut rng = RngStream::new(51, 0);
        let v = crate::rng::gaussian_vector(&mut rng, 9);
        let full = sample_haar(&mut rng, 9, 9);
        assert!(embedding_success(&full, &v, 0.5).unwrap());

        // A coordinate draw that misses the support of e_j fails for any eps.
        let e_last = DenseVector::basis(9, 8);
        loop {
            let p = sample_coordinate(&mut rng, 9, 2);
            if !p.coordinate_indices().unwrap().contains(&8) {
                assert!(!embedding_success(&p, &e_last, 0.9).unwrap());
                break;
            }
        }

        let zero = DenseVector::zeros(9);
        assert!(embedding_success(&full, &zero, 0.5).is_err());
        assert!(embedding_success(&full, &v, 0.0).is_err());
        assert!(embedding_success(&full, &v, 1.0).is_err());
    }
}
