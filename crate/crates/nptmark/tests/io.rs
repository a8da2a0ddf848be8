use std::io::Cursor;

use image::{ImageFormat, Luma, LumaA, Rgb, RgbImage, Rgba};
use nptmark::io::{decode_gray, encode_gray, luma, OutputFormat};
use nptmark::pnm::{decode_pgm, encode_pgm};
use nptmark_core::SampleDepth;
use proptest::prelude::*;

fn png_bytes<P: image::PixelWithColorType>(img: &image::ImageBuffer<P, Vec<P::Subpixel>>) -> Vec<u8>
where
    [P::Subpixel]: image::EncodableLayout,
{
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png).unwrap();
    out.into_inner()
}

#[test]
fn colour_png_uses_luma_weights() {
    let pixels = [[255, 0, 0], [0, 255, 0], [0, 0, 255], [10, 200, 30], [255, 255, 255], [0, 0, 0]];
    let img = RgbImage::from_fn(3, 2, |x, y| Rgb(pixels[(y * 3 + x) as usize]));
    let gray = decode_gray(&png_bytes(&img)).unwrap();
    assert_eq!((gray.rows(), gray.cols()), (2, 3));
    // 0.299 * 255 = 76.245, 0.587 * 255 = 149.685, 0.114 * 255 = 29.07,
    // 2.99 + 117.4 + 3.42 = 123.81.
    assert_eq!(gray.to_bytes(), [76, 150, 29, 124, 255, 0]);
}

#[test]
fn gray_and_alpha_pngs_keep_levels() {
    let img = image::ImageBuffer::from_fn(4, 1, |x, _| Luma([(x * 60) as u8]));
    assert_eq!(decode_gray(&png_bytes(&img)).unwrap().to_bytes(), [0, 60, 120, 180]);
    let img = image::ImageBuffer::from_fn(2, 1, |x, _| LumaA([(x * 90) as u8, 17]));
    assert_eq!(decode_gray(&png_bytes(&img)).unwrap().to_bytes(), [0, 90]);
    let img = image::ImageBuffer::from_fn(1, 1, |_, _| Rgba([100u8, 100, 100, 0]));
    assert_eq!(decode_gray(&png_bytes(&img)).unwrap().to_bytes(), [100]);
}

#[test]
fn unknown_magic_is_rejected() {
    assert!(decode_gray(b"GIF89a").is_err());
    assert!(decode_gray(b"").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn pgm_round_trip_is_byte_identical(
        w in 1usize..20,
        h in 1usize..20,
        seed in any::<u64>(),
        comment in proptest::option::of("[a-z ]{0,12}"),
    ) {
        let body: Vec<u8> = (0..w * h).map(|k| (seed.wrapping_mul(k as u64 + 1) >> 17) as u8).collect();
        let mut canonical = format!("P5\n{w} {h}\n255\n").into_bytes();
        canonical.extend_from_slice(&body);
        let img = decode_pgm(&canonical).unwrap();
        prop_assert_eq!(img.depth(), SampleDepth::Eight);
        prop_assert_eq!(encode_pgm(img.pixels()), canonical.clone());
        prop_assert_eq!(encode_gray(img.pixels(), OutputFormat::Pgm), canonical.clone());

        if let Some(c) = comment {
            let mut commented = format!("P5\n# {c}\n{w}  {h}\n255\n").into_bytes();
            commented.extend_from_slice(&body);
            let again = decode_pgm(&commented).unwrap();
            prop_assert_eq!(encode_pgm(again.pixels()), canonical);
        }
    }

    #[test]
    fn pfm_round_trip_preserves_f32(w in 1usize..12, h in 1usize..12, seed in any::<u64>()) {
        let m = nptmark_core::synthetic::uniform_matrix(h, w, seed).map(|v| (v * 1.2 - 0.1) as f32 as f64);
        let bytes = encode_gray(&m, OutputFormat::Pfm);
        let back = decode_gray(&bytes).unwrap();
        prop_assert_eq!(back.depth(), SampleDepth::Float);
        prop_assert_eq!(back.pixels(), &m);
    }

    #[test]
    fn luma_matches_float_formula(r in any::<u8>(), g in any::<u8>(), b in any::<u8>()) {
        let exact = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
        let got = f64::from(luma([r, g, b]));
        prop_assert!((got - exact).abs() <= 0.5 + 1e-9, "{} vs {}", got, exact);
    }
}
