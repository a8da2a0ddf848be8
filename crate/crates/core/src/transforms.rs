//! Discrete Hartley matrix and the natural preserving transform built on it.
//!
//! `H[k][j] = cas(2 pi k j / N) / sqrt(N)` with `cas x = cos x + sin x`
//! (0-based indices). `H` is symmetric, orthogonal and involutory, so the NPT
//! operator `psi = alpha I + (1 - alpha) H` has eigenvalues `1` and
//! `2 alpha - 1` and its inverse stays in the span of `{I, H}`.

use core::f64::consts::PI;

use crate::{Error, Matrix, Result};

/// Default iteration cap for [`NptOperator::inverse_series`].
pub const DEFAULT_SERIES_MAX_ITER: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct HartleyMatrix {
    entries: Matrix,
}

impl HartleyMatrix {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("Hartley order must be >= 1".into()));
        }
        let scale = 1.0 / libm::sqrt(order as f64);
        // k*j reduced mod N keeps the angle in [0, 2 pi) for large orders.
        let entries = Matrix::from_fn(order, order, |k, j| {
            let angle = 2.0 * PI * ((k * j) % order) as f64 / order as f64;
            (libm::cos(angle) + libm::sin(angle)) * scale
        });
        Ok(HartleyMatrix { entries })
    }

    pub fn order(&self) -> usize {
        self.entries.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }
}

pub fn dht_matrix(order: usize) -> Result<HartleyMatrix> {
    HartleyMatrix::new(order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformedImage {
    pub data: Matrix,
    pub alpha: f64,
    pub direction: Direction,
}

/// `psi(alpha) = alpha I + (1 - alpha) H`, immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct NptOperator {
    alpha: f64,
    psi: Matrix,
    hartley: HartleyMatrix,
}

impl NptOperator {
    /// Build the operator for `0.5 < alpha <= 1`. At `alpha = 0.5` psi is
    /// singular and below it the Neumann series diverges.
    pub fn new(order: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 0.5 && alpha <= 1.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "alpha must lie in (0.5, 1], got {alpha}"
            )));
        }
        Ok(Self::new_unchecked(HartleyMatrix::new(order)?, alpha))
    }

    /// Skips the alpha range check (e.g. `alpha = 0` gives `psi = H`).
    /// Inversion is meaningless outside `(0.5, 1]`.
    #[doc(hidden)]
    pub fn new_unchecked(hartley: HartleyMatrix, alpha: f64) -> Self {
        let n = hartley.order();
        let h = hartley.matrix();
        let psi = Matrix::from_fn(n, n, |i, j| {
            let id = if i == j { alpha } else { 0.0 };
            id + (1.0 - alpha) * h[(i, j)]
        });
        NptOperator {
            alpha,
            psi,
            hartley,
        }
    }

    pub fn order(&self) -> usize {
        self.psi.rows()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn psi(&self) -> &Matrix {
        &self.psi
    }

    pub fn hartley(&self) -> &HartleyMatrix {
        &self.hartley
    }

    /// `(a, b)` with `psi^-1 = a I + b H`, solved from `H^2 = I`.
    pub fn inverse_coefficients(&self) -> (f64, f64) {
        let alpha = self.alpha;
        let det = 2.0 * alpha - 1.0;
        (alpha / det, -(1.0 - alpha) / det)
    }

    pub fn inverse_matrix(&self) -> Matrix {
        let (a, b) = self.inverse_coefficients();
        let h = self.hartley.matrix();
        let n = self.order();
        Matrix::from_fn(n, n, |i, j| {
            let id = if i == j { a } else { 0.0 };
            id + b * h[(i, j)]
        })
    }

    fn check_square(&self, m: &Matrix) -> Result<()> {
        m.ensure_shape(self.order(), self.order())
    }

    /// `psi * image * psi`.
    pub fn forward(&self, image: &Matrix) -> Result<TransformedImage> {
        self.check_square(image)?;
        Ok(TransformedImage {
            data: self.apply(image),
            alpha: self.alpha,
            direction: Direction::Forward,
        })
    }

    pub(crate) fn apply(&self, image: &Matrix) -> Matrix {
        self.psi.matmul(image).matmul(&self.psi)
    }

    /// `psi^-1 * transformed * psi^-1` using the closed-form inverse.
    pub fn inverse_direct(&self, transformed: &Matrix) -> Result<Matrix> {
        self.check_square(transformed)?;
        let inv = self.inverse_matrix();
        Ok(inv.matmul(transformed).matmul(&inv))
    }

    /// Invert with the alternating Neumann series
    /// `psi^-1 = (1/alpha) sum_k (-(1 - alpha)/alpha H)^k`, applied to the
    /// image from the left and then from the right.
    ///
    /// Each side stops once the geometric tail bound (Frobenius norm, which
    /// bounds the max-abs error since `H` is orthogonal) drops below its share
    /// of `tol`. Returns the image and the number of series terms used on the
    /// slower side.
    pub fn inverse_series(
        &self,
        transformed: &Matrix,
        tol: f64,
        max_iter: usize,
    ) -> Result<(Matrix, usize)> {
        self.check_square(transformed)?;
        if !(tol > 0.0) || max_iter == 0 {
            return Err(Error::InvalidArgument(
                "series inverse needs tol > 0 and max_iter >= 1".into(),
            ));
        }
        // Left error is amplified by ||psi^-1||_2 = 1/(2 alpha - 1) on the right pass.
        let left_tol = 0.5 * tol * (2.0 * self.alpha - 1.0);
        let (left, left_terms) = self.series_pass(transformed, left_tol, max_iter, Side::Left)?;
        let (both, right_terms) = self.series_pass(&left, 0.5 * tol, max_iter, Side::Right)?;
        Ok((both, left_terms.max(right_terms)))
    }

    fn series_pass(
        &self,
        x: &Matrix,
        tol: f64,
        max_iter: usize,
        side: Side,
    ) -> Result<(Matrix, usize)> {
        let ratio = (1.0 - self.alpha) / self.alpha;
        let h = self.hartley.matrix();
        let mut term = x.scaled(1.0 / self.alpha);
        let mut sum = term.clone();
        let mut bound = f64::INFINITY;
        for terms in 1..=max_iter {
            bound = if ratio == 0.0 {
                0.0
            } else {
                term.frobenius_norm() * ratio / (1.0 - ratio)
            };
            if bound <= tol {
                return Ok((sum, terms));
            }
            if terms == max_iter {
                break;
            }
            let next = match side {
                Side::Left => h.matmul(&term),
                Side::Right => term.matmul(h),
            };
            term = next.scaled(-ratio);
            sum = sum.add(&term);
        }
        Err(Error::ConvergenceFailure {
            iterations: max_iter,
            residual: bound,
        })
    }
}

#[derive(Clone, Copy)]
enum Side {
    Left,
    Right,
}

pub fn npt_operator(order: usize, alpha: f64) -> Result<NptOperator> {
    NptOperator::new(order, alpha)
}

/// Receives counts of scalar operations from instrumented kernels.
pub trait OpTally {
    fn mul(&mut self);
    fn add(&mut self);
}

impl OpTally for () {
    #[inline(always)]
    fn mul(&mut self) {}
    #[inline(always)]
    fn add(&mut self) {}
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct OpCount {
    pub multiplications: u64,
    pub additions: u64,
}

impl OpTally for OpCount {
    #[inline]
    fn mul(&mut self) {
        self.multiplications += 1;
    }
    #[inline]
    fn add(&mut self) {
        self.additions += 1;
    }
}

/// Textbook product: each output entry takes `n` multiplications and
/// `n - 1` additions.
fn naive_matmul<T: OpTally>(a: &Matrix, b: &Matrix, tally: &mut T) -> Matrix {
    let n = a.cols();
    Matrix::from_fn(a.rows(), b.cols(), |i, j| {
        let mut acc = a[(i, 0)] * b[(0, j)];
        tally.mul();
        for k in 1..n {
            acc += a[(i, k)] * b[(k, j)];
            tally.mul();
            tally.add();
        }
        acc
    })
}

/// Two-sided 2-D Hartley transform `H * image * H`. Applying it twice
/// returns the input.
pub fn dht_apply_2d(image: &Matrix) -> Result<Matrix> {
    dht_apply_2d_counted(image, &mut ())
}

/// [`dht_apply_2d`] with every scalar multiply and add reported to `tally`:
/// `2 N^3` multiplications and `2 N^2 (N - 1)` additions.
pub fn dht_apply_2d_counted<T: OpTally>(image: &Matrix, tally: &mut T) -> Result<Matrix> {
    if !image.is_square() {
        return Err(Error::mismatch((image.rows(), image.rows()), image.shape()));
    }
    let h = HartleyMatrix::new(image.rows())?;
    Ok(dht_with(h.matrix(), image, tally))
}

pub(crate) fn dht_with<T: OpTally>(h: &Matrix, image: &Matrix, tally: &mut T) -> Matrix {
    let left = naive_matmul(h, image, tally);
    naive_matmul(&left, h, tally)
}
