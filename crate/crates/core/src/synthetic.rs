//! Seeded synthetic test images, all on the 8-bit lattice `k / 255`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::quantize_matrix;
use crate::Matrix;

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform pixels in `[0, 1)`, not quantized.
pub fn uniform_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(rows, cols, |_, _| uniform(&mut rng))
}

/// Photo-like scene: a lighting gradient, a few soft blobs, low-frequency
/// waves and faint fine texture, mapped into roughly `[0.08, 0.92]`.
pub fn natural_scene(n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = n.max(1) as f64;
    let gx = uniform(&mut rng) - 0.5;
    let gy = uniform(&mut rng) - 0.5;
    let blobs: Vec<[f64; 4]> = (0..5)
        .map(|_| {
            [
                uniform(&mut rng) * size,
                uniform(&mut rng) * size,
                (0.08 + 0.2 * uniform(&mut rng)) * size,
                uniform(&mut rng) - 0.5,
            ]
        })
        .collect();
    let waves: Vec<[f64; 4]> = (0..4)
        .map(|_| {
            [
                1.0 + 4.0 * uniform(&mut rng),
                1.0 + 4.0 * uniform(&mut rng),
                2.0 * PI * uniform(&mut rng),
                0.06 * uniform(&mut rng),
            ]
        })
        .collect();
    let texture = uniform_matrix(n, n, seed ^ 0x9e37_79b9_7f4a_7c15);
    let raw = Matrix::from_fn(n, n, |i, j| {
        let (y, x) = (i as f64, j as f64);
        let mut v = 0.5 + 0.25 * (gx * x + gy * y) / size;
        for [cy, cx, radius, amp] in &blobs {
            let d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
            v += 0.5 * amp * libm::exp(-d2 / (2.0 * radius * radius));
        }
        for [fy, fx, phase, amp] in &waves {
            v += amp * libm::sin(2.0 * PI * (fy * y + fx * x) / size + phase);
        }
        v + 0.03 * (texture[(i, j)] - 0.5)
    });
    quantize_matrix(&raw.map(|v| 0.08 + 0.84 * v.clamp(0.0, 1.0)))
}

/// Two-level logo: blocky glyph-like strokes on a light background.
pub fn logo_pattern(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cell = (rows.min(cols) / 4).max(1);
    let grid_rows = rows.div_ceil(cell);
    let grid_cols = cols.div_ceil(cell);
    let cells: Vec<bool> = (0..grid_rows * grid_cols)
        .map(|_| uniform(&mut rng) < 0.45)
        .collect();
    let raw = Matrix::from_fn(rows, cols, |i, j| {
        let on = cells[(i / cell) * grid_cols + j / cell];
        let border = i == 0 || j == 0 || i + 1 == rows || j + 1 == cols;
        if on || border {
            0.1
        } else {
            0.9
        }
    });
    quantize_matrix(&raw)
}
