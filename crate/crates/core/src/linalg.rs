//! Dense Hermitian helpers shared by the pipeline and the oracles.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn anti_hermitian_norm(m: &CMat) -> f64 {
    (m - m.adjoint()).norm() * 0.5
}

pub fn herm_eigen(m: &CMat) -> HermEigen {
    let n = m.nrows();
    if n == 0 {
        return HermEigen { values: vec![], vectors: CMat::zeros(0, 0) };
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    HermEigen { values, vectors }
}

impl HermEigen {
    /// Rebuild `V f(Λ) V†`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMat {
        let d = DVector::from_iterator(self.values.len(), self.values.iter().map(|&x| c(f(x))));
        let scaled = &self.vectors * DMatrix::from_diagonal(&d);
        scaled * self.vectors.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::INFINITY)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NEG_INFINITY)
    }
}

pub fn herm_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    herm_eigen(m).apply(f)
}

pub fn lambda_min(m: &CMat) -> f64 {
    herm_eigen(m).min()
}

pub fn sym_eigen_values(m: &RMat) -> Vec<f64> {
    let sym = (m + m.transpose()).scale(0.5);
    let mut v: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Real symmetric embedding `A + iB  ->  [[A, -B], [B, A]]`.
pub fn embed_real(m: &CMat) -> RMat {
    let n = m.nrows();
    RMat::from_fn(2 * n, 2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Inverse of [`embed_real`] for matrices paired through the trace:
/// `tr(M Z) = <embed(M), X>` when `Z = collapse(X)`.
pub fn collapse_real(x: &RMat) -> CMat {
    let n = x.nrows() / 2;
    CMat::from_fn(n, n, |i, j| {
        Complex64::new(x[(i, j)] + x[(i + n, j + n)], x[(i + n, j)] - x[(i, j + n)])
    })
}

/// `tr(A B)` without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}
