#![allow(dead_code)]

use nalgebra::DMatrix;
use nptmark_core::Matrix;

pub fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn from_na(m: &DMatrix<f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Hartley matrix straight from the kernel, no index reduction.
pub fn cas_hartley(n: usize) -> DMatrix<f64> {
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |k, j| {
        let theta = 2.0 * std::f64::consts::PI * (k as f64) * (j as f64) / n as f64;
        scale * (theta.cos() + theta.sin())
    })
}

pub fn oracle_psi(n: usize, alpha: f64) -> DMatrix<f64> {
    DMatrix::identity(n, n) * alpha + cas_hartley(n) * (1.0 - alpha)
}

/// Least squares through SVD.
pub fn svd_solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.clone().svd(true, true).solve(b, 1e-13).expect("svd solve")
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    (a - b).abs().max()
}
