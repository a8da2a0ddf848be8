//! Deterministic image degradations: additive Gaussian noise, cropping and a
//! block-transform compression surrogate.
//!
//! Noise generator, fixed so runs reproduce across platforms: ChaCha8 seeded
//! with `seed_from_u64(seed)`; each `u64` draw becomes a uniform
//! `(x >> 11) * 2^-53`; pixels are visited row-major in pairs and receive
//! Box-Muller deviates `sqrt(-2 ln(1 - u1)) * (cos, sin)(2 pi u2)`.
//!
//! Compression surrogate: orthonormal 8x8 DCT-II per block, coefficients
//! snapped to multiples of `(101 - quality) / 1024`, inverse DCT, clamp to
//! `[0, 1]`. Images are reflect-padded to a multiple of 8 and cropped back.

use core::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embed::Region;
use crate::{Error, Matrix, Result};

pub const BLOCK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CropFill {
    Zero,
    Mean,
}

impl CropFill {
    pub fn name(self) -> &'static str {
        match self {
            CropFill::Zero => "zero",
            CropFill::Mean => "mean",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackKind {
    GaussianNoise { sigma: f64 },
    Crop { rect: Region, fill: CropFill },
    Compress { quality: u8 },
}

impl AttackKind {
    pub fn name(&self) -> &'static str {
        match self {
            AttackKind::GaussianNoise { .. } => "noise",
            AttackKind::Crop { .. } => "crop",
            AttackKind::Compress { .. } => "compress",
        }
    }

    /// Ordering rank of the attack family in sweep tables.
    pub fn family_rank(&self) -> u8 {
        match self {
            AttackKind::GaussianNoise { .. } => 1,
            AttackKind::Crop { .. } => 2,
            AttackKind::Compress { .. } => 3,
        }
    }

    /// Larger means stronger degradation within a family.
    pub fn intensity(&self) -> f64 {
        match *self {
            AttackKind::GaussianNoise { sigma } => sigma,
            AttackKind::Crop { rect, .. } => rect.area() as f64,
            AttackKind::Compress { quality } => f64::from(101 - quality.min(100)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackSpec {
    pub kind: AttackKind,
    pub seed: u64,
}

impl AttackSpec {
    pub fn apply(&self, image: &Matrix) -> Result<Matrix> {
        match self.kind {
            AttackKind::GaussianNoise { sigma } => attack_noise(image, sigma, self.seed),
            AttackKind::Crop { rect, fill } => attack_crop(image, rect, fill),
            AttackKind::Compress { quality } => attack_compress(image, quality),
        }
    }
}

#[inline]
fn unit_uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Add zero-mean Gaussian noise of standard deviation `sigma` (on the `[0, 1]`
/// scale) and clamp to `[0, 1]`.
pub fn attack_noise(image: &Matrix, sigma: f64, seed: u64) -> Result<Matrix> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument("noise sigma must be finite and >= 0".into()));
    }
    if sigma == 0.0 {
        return Ok(image.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = image.clone();
    for pair in out.as_mut_slice().chunks_mut(2) {
        let u1 = unit_uniform(&mut rng);
        let u2 = unit_uniform(&mut rng);
        let radius = libm::sqrt(-2.0 * libm::log(1.0 - u1));
        let theta = 2.0 * PI * u2;
        let deviates = [radius * libm::cos(theta), radius * libm::sin(theta)];
        for (v, z) in pair.iter_mut().zip(deviates) {
            *v = (*v + sigma * z).clamp(0.0, 1.0);
        }
    }
    Ok(out)
}

pub fn attack_crop(image: &Matrix, rect: Region, fill: CropFill) -> Result<Matrix> {
    if !rect.fits(image.rows(), image.cols()) {
        return Err(Error::InvalidArgument("crop rectangle outside image".into()));
    }
    let value = match fill {
        CropFill::Zero => 0.0,
        CropFill::Mean => image.mean(),
    };
    let mut out = image.clone();
    out.set_block(rect.row, rect.col, &Matrix::filled(rect.rows, rect.cols, value));
    Ok(out)
}

fn dct_basis() -> Matrix {
    Matrix::from_fn(BLOCK, BLOCK, |k, n| {
        let scale = if k == 0 {
            libm::sqrt(1.0 / BLOCK as f64)
        } else {
            libm::sqrt(2.0 / BLOCK as f64)
        };
        scale * libm::cos(PI * (2 * n + 1) as f64 * k as f64 / (2 * BLOCK) as f64)
    })
}

/// Half-sample symmetric reflection of `i` into `0..len`.
fn reflect(i: usize, len: usize) -> usize {
    let period = 2 * len;
    let m = i % period;
    if m < len {
        m
    } else {
        period - 1 - m
    }
}

pub fn quantizer_step(quality: u8) -> f64 {
    f64::from(101 - quality) / 1024.0
}

pub fn attack_compress(image: &Matrix, quality: u8) -> Result<Matrix> {
    if !(1..=100).contains(&quality) {
        return Err(Error::InvalidArgument("quality must be within 1..=100".into()));
    }
    let (rows, cols) = image.shape();
    if rows == 0 || cols == 0 {
        return Ok(image.clone());
    }
    let step = quantizer_step(quality);
    let pr = rows.div_ceil(BLOCK) * BLOCK;
    let pc = cols.div_ceil(BLOCK) * BLOCK;
    let mut padded = Matrix::from_fn(pr, pc, |i, j| image[(reflect(i, rows), reflect(j, cols))]);
    let basis = dct_basis();
    let basis_t = basis.transpose();
    for bi in (0..pr).step_by(BLOCK) {
        for bj in (0..pc).step_by(BLOCK) {
            let block = padded.block(bi, bj, BLOCK, BLOCK);
            let coeffs = basis.matmul(&block).matmul(&basis_t);
            let snapped = coeffs.map(|c| step * libm::round(c / step));
            let restored = basis_t.matmul(&snapped).matmul(&basis);
            padded.set_block(bi, bj, &restored);
        }
    }
    Ok(padded.block(0, 0, rows, cols).clamp(0.0, 1.0))
}
