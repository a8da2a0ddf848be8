//! Image loading by content sniffing and atomic file output.

use std::fs;
use std::io::Write;
use std::path::Path;

use image::ImageFormat;
use nptmark_core::{GrayImage, Matrix, SampleDepth};

use crate::error::{Error, Result};
use crate::pnm;

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

pub fn decode_gray(data: &[u8]) -> Result<GrayImage> {
    if data.starts_with(b"P5") {
        pnm::decode_pgm(data)
    } else if data.starts_with(b"Pf") {
        pnm::decode_pfm(data)
    } else if data.starts_with(PNG_SIGNATURE) {
        decode_png(data)
    } else {
        Err(Error::format("unsupported image format (need P5 PGM, Pf PFM or PNG)"))
    }
}

/// Gray PNGs map directly; colour PNGs go through `0.299 R + 0.587 G +
/// 0.114 B`, rounded half up to the nearest level. Alpha is ignored.
fn decode_png(data: &[u8]) -> Result<GrayImage> {
    let decoded = image::load_from_memory_with_format(data, ImageFormat::Png)
        .map_err(|e| Error::format(format!("png: {e}")))?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    let bytes: Vec<u8> = if decoded.color().has_color() {
        decoded.to_rgb8().pixels().map(|p| luma(p.0)).collect()
    } else {
        decoded.to_luma8().into_raw()
    };
    Ok(GrayImage::from_bytes(height, width, &bytes)?)
}

/// Integer form of [`LUMA_WEIGHTS`] so ties round the same way everywhere.
pub fn luma([r, g, b]: [u8; 3]) -> u8 {
    let sum = 299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b);
    ((sum + 500) / 1000) as u8
}

pub fn load_gray(path: &Path) -> Result<GrayImage> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_gray(&data).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Pgm,
    Pfm,
}

impl OutputFormat {
    pub fn for_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("pfm") => Ok(OutputFormat::Pfm),
            Some("pgm") | None => Ok(OutputFormat::Pgm),
            Some(other) => Err(Error::Usage(format!(
                "cannot write '.{other}' images; use .pgm or .pfm"
            ))),
        }
    }

    pub fn depth(self) -> SampleDepth {
        match self {
            OutputFormat::Pgm => SampleDepth::Eight,
            OutputFormat::Pfm => SampleDepth::Float,
        }
    }
}

pub fn encode_gray(pixels: &Matrix, format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Pgm => pnm::encode_pgm(pixels),
        OutputFormat::Pfm => pnm::encode_pfm(pixels),
    }
}

/// Write through a temporary file in the target directory and rename it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn save_gray(path: &Path, pixels: &Matrix) -> Result<()> {
    let format = OutputFormat::for_path(path)?;
    write_atomic(path, &encode_gray(pixels, format))
}

/// Pixels as they will read back after [`save_gray`] to `path`.
pub fn stored_pixels(path: &Path, pixels: &Matrix) -> Result<Matrix> {
    let format = OutputFormat::for_path(path)?;
    Ok(decode_gray(&encode_gray(pixels, format))?.into_pixels())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extension_picks_format() {
        assert_eq!(OutputFormat::for_path(Path::new("a.PFM")).unwrap(), OutputFormat::Pfm);
        assert_eq!(OutputFormat::for_path(Path::new("a.pgm")).unwrap(), OutputFormat::Pgm);
        assert!(OutputFormat::for_path(Path::new("a.png")).is_err());
    }

    #[test]
    fn unknown_magic_rejected() {
        assert!(matches!(decode_gray(b"GIF89a"), Err(Error::Format(_))));
    }
}
