//! Image quality metrics.

use crate::{Error, Matrix, Result};

/// Reported in place of an infinite PSNR.
pub const PSNR_CAP_DB: f64 = 99.0;

/// Peak signal-to-noise ratio on the 0-255 scale: `20 log10(255 / sqrt(MSE))`,
/// capped at [`PSNR_CAP_DB`].
pub fn psnr(a: &Matrix, b: &Matrix) -> Result<f64> {
    b.ensure_shape(a.rows(), a.cols())?;
    if a.as_slice().is_empty() {
        return Err(Error::UndefinedMetric("PSNR of empty images"));
    }
    let mse = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| {
            let d = 255.0 * (x - y);
            d * d
        })
        .sum::<f64>()
        / a.as_slice().len() as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((20.0 * libm::log10(255.0 / libm::sqrt(mse))).min(PSNR_CAP_DB))
}

/// Idealized NPT trade-off `20 log10(alpha / (1 - alpha))`, capped like
/// [`psnr`].
pub fn ideal_psnr(alpha: f64) -> f64 {
    if alpha >= 1.0 {
        return PSNR_CAP_DB;
    }
    (20.0 * libm::log10(alpha / (1.0 - alpha))).min(PSNR_CAP_DB)
}

/// Normalized correlation `sum(a * b) / (||a|| ||b||)`, no mean removal.
pub fn ncorr(original: &Matrix, extracted: &Matrix) -> Result<f64> {
    extracted.ensure_shape(original.rows(), original.cols())?;
    let na = original.frobenius_norm();
    let nb = extracted.frobenius_norm();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::UndefinedMetric("NCORR of an all-zero image"));
    }
    let dot: f64 = original
        .as_slice()
        .iter()
        .zip(extracted.as_slice())
        .map(|(x, y)| x * y)
        .sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Mean-centred (Pearson) variant of [`ncorr`], for diagnostics.
pub fn ncorr_centered(original: &Matrix, extracted: &Matrix) -> Result<f64> {
    extracted.ensure_shape(original.rows(), original.cols())?;
    let ma = original.mean();
    let mb = extracted.mean();
    ncorr(&original.map(|v| v - ma), &extracted.map(|v| v - mb))
}
