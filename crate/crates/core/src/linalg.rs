//! Minimal dense linear algebra: column-major matrices, the handful of
//! kernels the optimizer needs, and a thin Householder QR.
//!
//! Everything is `f64`. Dimension mismatches are programmer errors and
//! panic; data-dependent failures (rank deficiency) are `Err` values.

use crate::error::{Result, SsdError};
use std::ops::{Index, IndexMut};

/// Relative threshold below which an `R` diagonal entry is treated as zero.
const RANK_TOLERANCE: f64 = 1e-12;

/// A dense real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector {
    data: Vec<f64>,
}

impl DenseVector {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "vector dimension must be positive");
        Self {
            data: vec![0.0; dim],
        }
    }

    pub fn from_vec(data: Vec<f64>) -> Self {
        assert!(!data.is_empty(), "vector dimension must be positive");
        Self { data }
    }

    /// Standard basis vector `e_i` (zero-indexed).
    pub fn basis(dim: usize, i: usize) -> Self {
        assert!(i < dim, "basis index {i} out of range for dimension {dim}");
        let mut v = Self::zeros(dim);
        v.data[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dot: dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Euclidean norm.
    pub fn norm2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &DenseVector) {
        assert_eq!(self.dim(), x.dim(), "axpy: dimension mismatch");
        for (s, xi) in self.data.iter_mut().zip(&x.data) {
            *s += a * xi;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for s in &mut self.data {
            *s *= a;
        }
    }

    /// `self - other` as a new vector.
    pub fn sub(&self, other: &DenseVector) -> DenseVector {
        assert_eq!(self.dim(), other.dim(), "sub: dimension mismatch");
        DenseVector {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl Index<usize> for DenseVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for DenseVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

/// A dense real matrix stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            data: vec![0.0; rows * cols],
            rows,
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i + i * n] = 1.0;
        }
        m
    }

    /// Builds a matrix from column-major storage.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        assert_eq!(
            data.len(),
            rows * cols,
            "storage length {} does not match {rows}x{cols}",
            data.len()
        );
        Self { data, rows, cols }
    }

    /// Builds a matrix from a row-major nested slice; convenient in tests.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        assert!(r > 0, "matrix dimensions must be positive");
        let c = rows[0].len();
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// The `j`-th column as a contiguous slice.
    pub fn col(&self, j: usize) -> &[f64] {
        assert!(j < self.cols, "column index out of range");
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        assert!(j < self.cols, "column index out of range");
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// `A v`.
    pub fn matvec(&self, v: &DenseVector) -> DenseVector {
        assert_eq!(self.cols, v.dim(), "matvec: dimension mismatch");
        let mut y = DenseVector::zeros(self.rows);
        for j in 0..self.cols {
            let vj = v[j];
            if vj == 0.0 {
                continue;
            }
            let col = self.col(j);
            for (yi, aij) in y.data.iter_mut().zip(col) {
                *yi += aij * vj;
            }
        }
        y
    }

    /// `Aᵀ v`.
    pub fn mat_t_vec(&self, v: &DenseVector) -> DenseVector {
        assert_eq!(self.rows, v.dim(), "mat_t_vec: dimension mismatch");
        let mut y = DenseVector::zeros(self.cols);
        for j in 0..self.cols {
            y[j] = self
                .col(j)
                .iter()
                .zip(v.iter())
                .map(|(a, b)| a * b)
                .sum();
        }
        y
    }

    /// Gram matrix `AᵀA`.
    pub fn gram(&self) -> DenseMatrix {
        let mut g = DenseMatrix::zeros(self.cols, self.cols);
        for i in 0..self.cols {
            for j in i..self.cols {
                let s: f64 = self
                    .col(i)
                    .iter()
                    .zip(self.col(j))
                    .map(|(a, b)| a * b)
                    .sum();
                g[(i, j)] = s;
                g[(j, i)] = s;
            }
        }
        g
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute deviation from the identity, `max |A - I|`.
    pub fn max_dev_from_identity(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "identity deviation needs a square matrix");
        let mut dev: f64 = 0.0;
        for j in 0..self.cols {
            for i in 0..self.rows {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((self[(i, j)] - target).abs());
            }
        }
        dev
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &self.data[i + j * self.rows]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &mut self.data[i + j * self.rows]
    }
}

/// Thin Householder QR of a `d x l` matrix with `d >= l`.
///
/// Returns `(Q, R)` with `Q` of size `d x l` having orthonormal columns,
/// `R` upper triangular `l x l`, `A = QR`, and every `R[i,i] > 0`.
/// Positivity is enforced by sign-flipping matched column/row pairs, which
/// makes the factorization (and anything sampled through it) a
/// deterministic function of the input.
///
/// Fails with [`SsdError::RankDeficient`] when a diagonal of `R` falls
/// below `1e-12 * ||A||_F`.
pub fn qr_thin(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let d = a.rows();
    let l = a.cols();
    assert!(d >= l, "qr_thin requires rows >= cols, got {d} < {l}");

    let threshold = RANK_TOLERANCE * a.frobenius_norm();
    let mut work = a.clone();
    // Householder vectors; reflectors[j] covers rows j..d.
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(l);

    for j in 0..l {
        let col = &work.col(j)[j..];
        let norm_x = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        let alpha = -norm_x.copysign(col[0]);
        let mut v: Vec<f64> = col.to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();

        if vnorm2 > 0.0 {
            for c in j..l {
                let target = &mut work.col_mut(c)[j..];
                let w: f64 = v.iter().zip(target.iter()).map(|(a, b)| a * b).sum();
                let scale = 2.0 * w / vnorm2;
                for (t, vi) in target.iter_mut().zip(&v) {
                    *t -= scale * vi;
                }
            }
        }
        reflectors.push(v);

        let rjj = work[(j, j)];
        if rjj.abs() < threshold || !rjj.is_finite() {
            return Err(SsdError::RankDeficient {
                index: j,
                value: rjj.abs(),
                threshold,
            });
        }
    }

    // Q = H_0 H_1 ... H_{l-1} applied to the first l identity columns.
    let mut q = DenseMatrix::zeros(d, l);
    for j in 0..l {
        q[(j, j)] = 1.0;
    }
    for j in (0..l).rev() {
        let v = &reflectors[j];
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for c in 0..l {
            let target = &mut q.col_mut(c)[j..];
            let w: f64 = v.iter().zip(target.iter()).map(|(a, b)| a * b).sum();
            let scale = 2.0 * w / vnorm2;
            for (t, vi) in target.iter_mut().zip(v) {
                *t -= scale * vi;
            }
        }
    }

    // Assemble R and flip signs so the diagonal is positive.
    let mut r = DenseMatrix::zeros(l, l);
    for j in 0..l {
        for i in 0..=j {
            r[(i, j)] = work[(i, j)];
        }
    }
    for i in 0..l {
        if r[(i, i)] < 0.0 {
            for j in i..l {
                r[(i, j)] = -r[(i, j)];
            }
            for v in q.col_mut(i) {
                *v = -*v;
            }
        }
    }

    Ok((q, r))
}
