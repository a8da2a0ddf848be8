//! Binary PGM (`P5`, maxval 255) and grayscale PFM (`Pf`) codecs.
//!
//! PGM pixels map to `v / 255`. PFM stores `f32` samples with the bottom row
//! first; the sign of the scale field gives the byte order.

use nptmark_core::{GrayImage, Matrix, SampleDepth};

use crate::error::{Error, Result};

struct Header<'a> {
    fields: [usize; 3],
    scale: Option<f64>,
    rest: &'a [u8],
}

fn skip_space_and_comments(mut data: &[u8]) -> &[u8] {
    loop {
        match data.first() {
            Some(b) if b.is_ascii_whitespace() => data = &data[1..],
            Some(b'#') => {
                let end = data.iter().position(|&b| b == b'\n').unwrap_or(data.len());
                data = &data[end..];
            }
            _ => return data,
        }
    }
}

fn token(data: &[u8]) -> Result<(&str, &[u8])> {
    let data = skip_space_and_comments(data);
    let end = data
        .iter()
        .position(|b| b.is_ascii_whitespace())
        .ok_or_else(|| Error::format("truncated header"))?;
    let text = std::str::from_utf8(&data[..end]).map_err(|_| Error::format("non-ASCII header"))?;
    if text.is_empty() {
        return Err(Error::format("truncated header"));
    }
    Ok((text, &data[end..]))
}

fn dimension<'a>(data: &'a [u8], what: &str) -> Result<(usize, &'a [u8])> {
    let (text, rest) = token(data)?;
    let value = text
        .parse::<usize>()
        .map_err(|_| Error::format(format!("bad {what} '{text}'")))?;
    if value == 0 {
        return Err(Error::format(format!("{what} must be positive")));
    }
    Ok((value, rest))
}

fn header<'a>(data: &'a [u8], magic: &[u8], float: bool) -> Result<Header<'a>> {
    let rest = data
        .strip_prefix(magic)
        .ok_or_else(|| Error::format("unsupported format"))?;
    let (width, rest) = dimension(rest, "width")?;
    let (height, rest) = dimension(rest, "height")?;
    let (third, scale, rest) = if float {
        let (text, rest) = token(rest)?;
        let scale = text
            .parse::<f64>()
            .ok()
            .filter(|s| s.is_finite() && *s != 0.0)
            .ok_or_else(|| Error::format(format!("bad scale '{text}'")))?;
        (0, Some(scale), rest)
    } else {
        let (maxval, rest) = dimension(rest, "maxval")?;
        (maxval, None, rest)
    };
    // Exactly one whitespace byte separates the header from the samples.
    let rest = match rest.first() {
        Some(b) if b.is_ascii_whitespace() => &rest[1..],
        _ => return Err(Error::format("missing separator after header")),
    };
    Ok(Header {
        fields: [width, height, third],
        scale,
        rest,
    })
}

pub fn decode_pgm(data: &[u8]) -> Result<GrayImage> {
    let Header {
        fields: [width, height, maxval],
        rest,
        ..
    } = header(data, b"P5", false)?;
    if maxval != 255 {
        return Err(Error::format(format!("maxval {maxval} unsupported, need 255")));
    }
    let len = width
        .checked_mul(height)
        .ok_or_else(|| Error::format("image too large"))?;
    if rest.len() != len {
        return Err(Error::format(format!(
            "expected {len} sample bytes, found {}",
            rest.len()
        )));
    }
    Ok(GrayImage::from_bytes(height, width, rest)?)
}

/// Canonical header `P5\n<w> <h>\n255\n` followed by `round(255 v)` bytes.
pub fn encode_pgm(pixels: &Matrix) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", pixels.cols(), pixels.rows()).into_bytes();
    out.extend(nptmark_core::image::quantize(pixels));
    out
}

pub fn decode_pfm(data: &[u8]) -> Result<GrayImage> {
    let Header {
        fields: [width, height, _],
        scale,
        rest,
    } = header(data, b"Pf", true)?;
    let little = scale.expect("float header has a scale") < 0.0;
    let len = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::format("image too large"))?;
    if rest.len() != len {
        return Err(Error::format(format!(
            "expected {len} sample bytes, found {}",
            rest.len()
        )));
    }
    let mut pixels = Matrix::zeros(height, width);
    for (k, chunk) in rest.chunks_exact(4).enumerate() {
        let bytes = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little {
            f32::from_le_bytes(bytes)
        } else {
            f32::from_be_bytes(bytes)
        };
        pixels[(height - 1 - k / width, k % width)] = f64::from(v);
    }
    Ok(GrayImage::new(pixels, SampleDepth::Float)?)
}

pub fn encode_pfm(pixels: &Matrix) -> Vec<u8> {
    let (rows, cols) = pixels.shape();
    let mut out = format!("Pf\n{cols} {rows}\n-1.0\n").into_bytes();
    out.reserve(rows * cols * 4);
    for i in (0..rows).rev() {
        for &v in pixels.row(i) {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_pgm() {
        let img = decode_pgm(b"P5\n2 2\n255\n\x00\x80\xff\x40").unwrap();
        let expected = [0.0, 128.0 / 255.0, 1.0, 64.0 / 255.0];
        assert_eq!(img.pixels().as_slice(), &expected);
        assert_eq!(img.depth(), SampleDepth::Eight);
    }

    #[test]
    fn comments_and_whitespace() {
        let img = decode_pgm(b"P5 # made by hand\n# another\n3\t1 255\n\x01\x02\x03").unwrap();
        assert_eq!(img.to_bytes(), [1, 2, 3]);
        assert_eq!(encode_pgm(img.pixels()), b"P5\n3 1\n255\n\x01\x02\x03");
    }

    #[test]
    fn malformed_headers() {
        assert!(decode_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(decode_pgm(b"P5\n1 1\n65535\n\x00\x00").is_err());
        assert!(decode_pgm(b"P5\n2 2\n255\n\x00").is_err());
        assert!(decode_pgm(b"P5\n0 2\n255\n").is_err());
        assert!(decode_pgm(b"P5\nx 2\n255\n\x00\x00").is_err());
        assert!(decode_pgm(b"P5\n1 1\n255").is_err());
    }

    #[test]
    fn pfm_rows_are_bottom_up() {
        let m = Matrix::from_vec(2, 3, vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.25]).unwrap();
        let bytes = encode_pfm(&m);
        assert!(bytes.starts_with(b"Pf\n3 2\n-1.0\n"));
        let first = f32::from_le_bytes(bytes[12..16].try_into().unwrap());
        assert_eq!(first, 0.75);
        assert_eq!(decode_pfm(&bytes).unwrap().pixels(), &m);
    }

    #[test]
    fn pfm_big_endian() {
        let mut bytes = b"Pf\n1 1\n1.0\n".to_vec();
        bytes.extend_from_slice(&0.5f32.to_be_bytes());
        assert_eq!(decode_pfm(&bytes).unwrap().pixels()[(0, 0)], 0.5);
    }
}
