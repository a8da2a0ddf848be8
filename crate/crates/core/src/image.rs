//! Grayscale raster with pixels normalized to `[0, 1]`.

use crate::{Error, Matrix, Result};

/// Storage precision of the file an image came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleDepth {
    Eight,
    Float,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pixels: Matrix,
    depth: SampleDepth,
}

impl GrayImage {
    /// Wrap normalized pixels. 8-bit images must lie in `[0, 1]`; float images
    /// only need to be finite since transformed data may overshoot slightly.
    pub fn new(pixels: Matrix, depth: SampleDepth) -> Result<Self> {
        if pixels.rows() == 0 || pixels.cols() == 0 {
            return Err(Error::InvalidArgument("empty image".into()));
        }
        if !pixels.is_finite() {
            return Err(Error::InvalidArgument("non-finite pixel".into()));
        }
        if depth == SampleDepth::Eight && pixels.as_slice().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument("8-bit pixel outside [0, 1]".into()));
        }
        Ok(GrayImage { pixels, depth })
    }

    pub fn from_bytes(rows: usize, cols: usize, bytes: &[u8]) -> Result<Self> {
        let data = bytes.iter().map(|&b| b as f64 / 255.0).collect();
        GrayImage::new(Matrix::from_vec(rows, cols, data)?, SampleDepth::Eight)
    }

    /// Quantize to bytes with `round(255 v)` clamped to `[0, 255]`.
    pub fn to_bytes(&self) -> alloc::vec::Vec<u8> {
        quantize(&self.pixels)
    }

    pub fn pixels(&self) -> &Matrix {
        &self.pixels
    }

    pub fn into_pixels(self) -> Matrix {
        self.pixels
    }

    pub fn depth(&self) -> SampleDepth {
        self.depth
    }

    pub fn rows(&self) -> usize {
        self.pixels.rows()
    }

    pub fn cols(&self) -> usize {
        self.pixels.cols()
    }
}

pub fn quantize(pixels: &Matrix) -> alloc::vec::Vec<u8> {
    pixels
        .as_slice()
        .iter()
        .map(|&v| libm::round(255.0 * v).clamp(0.0, 255.0) as u8)
        .collect()
}

/// Snap values to the 8-bit lattice `k / 255`.
pub fn quantize_matrix(pixels: &Matrix) -> Matrix {
    pixels.map(|v| libm::round(255.0 * v).clamp(0.0, 255.0) / 255.0)
}
