//! Householder QR factorization and the solves built on it.
//!
//! The factorization is stored LAPACK-style: `R` in the upper triangle, the
//! essential part of each reflector below the diagonal and the reflector
//! scalars in `tau`.

use alloc::vec::Vec;

use crate::{Error, Matrix, Result};

/// Relative threshold on `|R_kk| / max |R_jj|` below which a column counts as
/// linearly dependent.
pub const RANK_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Clone)]
pub struct Qr {
    packed: Matrix,
    tau: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solution: Matrix,
    /// Frobenius norm of `A x - b`.
    pub residual: f64,
}

impl Qr {
    /// Factor a tall (or square) matrix. Panics if `rows < cols`.
    pub fn new(a: &Matrix) -> Self {
        let (m, n) = a.shape();
        assert!(m >= n, "QR needs rows >= cols, got {m}x{n}");
        let mut qr = a.clone();
        let mut tau = Vec::with_capacity(n);
        for k in 0..n {
            let alpha = qr[(k, k)];
            let mut tail = 0.0;
            for i in k + 1..m {
                tail += qr[(i, k)] * qr[(i, k)];
            }
            if tail == 0.0 {
                tau.push(0.0);
                continue;
            }
            let norm = libm::hypot(alpha, libm::sqrt(tail));
            let beta = if alpha >= 0.0 { -norm } else { norm };
            let t = (beta - alpha) / beta;
            let scale = 1.0 / (alpha - beta);
            for i in k + 1..m {
                qr[(i, k)] *= scale;
            }
            qr[(k, k)] = beta;
            for j in k + 1..n {
                let mut s = qr[(k, j)];
                for i in k + 1..m {
                    s += qr[(i, k)] * qr[(i, j)];
                }
                s *= t;
                qr[(k, j)] -= s;
                for i in k + 1..m {
                    let v = qr[(i, k)];
                    qr[(i, j)] -= s * v;
                }
            }
            tau.push(t);
        }
        Qr { packed: qr, tau }
    }

    pub fn rows(&self) -> usize {
        self.packed.rows()
    }

    pub fn cols(&self) -> usize {
        self.packed.cols()
    }

    fn reflect(&self, k: usize, b: &mut Matrix) {
        let t = self.tau[k];
        if t == 0.0 {
            return;
        }
        let m = self.rows();
        for j in 0..b.cols() {
            let mut s = b[(k, j)];
            for i in k + 1..m {
                s += self.packed[(i, k)] * b[(i, j)];
            }
            s *= t;
            b[(k, j)] -= s;
            for i in k + 1..m {
                b[(i, j)] -= s * self.packed[(i, k)];
            }
        }
    }

    /// `b <- Q^T b`.
    pub fn apply_qt(&self, b: &mut Matrix) {
        assert_eq!(b.rows(), self.rows());
        for k in 0..self.cols() {
            self.reflect(k, b);
        }
    }

    /// `b <- Q b`.
    pub fn apply_q(&self, b: &mut Matrix) {
        assert_eq!(b.rows(), self.rows());
        for k in (0..self.cols()).rev() {
            self.reflect(k, b);
        }
    }

    pub fn r_diagonal(&self) -> Vec<f64> {
        (0..self.cols()).map(|k| self.packed[(k, k)]).collect()
    }

    /// Numerical rank from the diagonal of `R`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let diag = self.r_diagonal();
        let max = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        if max == 0.0 {
            return 0;
        }
        diag.iter().filter(|d| d.abs() > rel_tol * max).count()
    }

    fn require_full_rank(&self) -> Result<()> {
        let rank = self.rank(RANK_TOLERANCE);
        if rank < self.cols() {
            return Err(Error::RankDeficient {
                expected: self.cols(),
                found: rank,
            });
        }
        Ok(())
    }

    /// Minimize `||A x - b||_F` column by column.
    pub fn solve_least_squares(&self, b: &Matrix) -> Result<LeastSquares> {
        b.ensure_shape(self.rows(), b.cols())?;
        self.require_full_rank()?;
        let n = self.cols();
        let mut c = b.clone();
        self.apply_qt(&mut c);
        let mut x = c.block(0, 0, n, c.cols());
        for j in 0..x.cols() {
            for i in (0..n).rev() {
                let mut s = x[(i, j)];
                for k in i + 1..n {
                    s -= self.packed[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = s / self.packed[(i, i)];
            }
        }
        let residual = c.block(n, 0, self.rows() - n, c.cols()).frobenius_norm();
        Ok(LeastSquares {
            solution: x,
            residual,
        })
    }

    /// Orthonormal basis (as columns) of the orthogonal complement of the
    /// column space, i.e. the trailing `rows - cols` columns of `Q`.
    pub fn complement_basis(&self) -> Matrix {
        let (m, n) = (self.rows(), self.cols());
        let mut basis = Matrix::zeros(m, m - n);
        for i in 0..m - n {
            basis[(n + i, i)] = 1.0;
        }
        self.apply_q(&mut basis);
        basis
    }
}

pub fn least_squares(a: &Matrix, b: &Matrix) -> Result<LeastSquares> {
    if a.rows() < a.cols() {
        return Err(Error::Shape(alloc::format!(
            "underdetermined system {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if b.rows() != a.rows() {
        return Err(Error::mismatch((a.rows(), b.cols()), b.shape()));
    }
    Qr::new(a).solve_least_squares(b)
}

/// Solve the square system `a x = b`.
pub fn solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::Shape(alloc::format!(
            "solve needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(least_squares(a, b)?.solution)
}
